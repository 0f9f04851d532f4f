#include "qvote/consensus.hpp"

#include "qvote/error.hpp"

#include <map>

namespace qvote {

ConsensusDecision hsba_round(const std::vector<MinerOpinion>& opinions,
                             const std::set<PartyId>& honest_miners) {
    if (opinions.empty())
        throw Error(Errc::NoMiners, "consensus round without miners");
    if (honest_miners.empty())
        throw Error(Errc::NoMiners, "consensus round without honest miners");

    ConsensusDecision decision;
    decision.votes_total = static_cast<std::uint32_t>(opinions.size());

    // Plurality digest among honest miners that received anything at all.
    std::map<Digest, std::uint32_t> version_counts;
    for (const MinerOpinion& op : opinions) {
        if (op.update_digest && honest_miners.count(op.miner))
            version_counts[*op.update_digest]++;
    }
    std::uint32_t best = 0;
    bool tie = false;
    for (const auto& [digest, count] : version_counts) {
        if (count > best) {
            best = count;
            decision.agreed_digest = digest;
            tie = false;
        } else if (count == best) {
            tie = true;
        }
    }
    if (best == 0 || tie) {
        decision.agreed_digest.reset();
        return decision; // conflicting or missing versions: fail closed
    }

    for (const MinerOpinion& op : opinions) {
        if (op.update_digest == decision.agreed_digest && op.admissible)
            decision.votes_for++;
    }
    decision.admitted = decision.votes_for >= admission_threshold(decision.votes_total);
    return decision;
}

} // namespace qvote

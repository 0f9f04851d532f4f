#pragma once

#include "qvote/hash.hpp"
#include "qvote/party.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

namespace qvote {

// One miner's verdict on an update: the version it received (digest over the
// update content, absent when nothing valid arrived) and its local
// admissibility check.
struct MinerOpinion {
    PartyId miner;
    std::optional<Digest> update_digest;
    bool admissible = false;
};

struct ConsensusDecision {
    std::optional<Digest> agreed_digest;
    bool admitted = false;
    std::uint32_t votes_for = 0;
    std::uint32_t votes_total = 0;
};

// "At least half of the miners agree": inclusive threshold, so even m admits
// at exactly half.
inline std::uint32_t admission_threshold(std::uint32_t m) { return (m + 1) / 2; }

// One synchronous round of honest-success Byzantine agreement, modeled as an
// echo broadcast with plurality resolution over the honest miners' received
// versions. A tie between versions fails closed. The update is admitted iff
// the admissible votes on the agreed version reach the threshold.
ConsensusDecision hsba_round(const std::vector<MinerOpinion>& opinions,
                             const std::set<PartyId>& honest_miners);

} // namespace qvote

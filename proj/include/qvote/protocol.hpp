#pragma once

#include "qvote/config.hpp"
#include "qvote/ledger.hpp"
#include "qvote/netsim.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qvote {

struct RoundSummary {
    std::uint32_t round = 0;
    RecordKind kind = RecordKind::BallotCommitment;
    PartyId voter;
    bool admitted = false;
    std::uint32_t votes_for = 0;
    std::uint32_t votes_total = 0;
    std::optional<RejectReason> reason;
};

struct VoterInclusionReport {
    PartyId voter;
    InclusionStatus status;
};

struct ElectionReport {
    ScenarioConfig config;
    bool aborted = false;
    std::string abort_reason;
    std::optional<std::uint64_t> tally;
    std::vector<VoterInclusionReport> inclusion;
    std::vector<CheatEvent> cheats;
    std::vector<RoundSummary> rounds;
    ordered_json adversary_outcome; // role-specific evidence, null when honest

    ordered_json to_json() const;
};

struct ElectionResult {
    ElectionReport report;
    std::string trace;
    Blockchain chain; // the observer's copy

    // Simulator-side oracle data, never part of the public artifacts.
    std::vector<std::uint32_t> votes;
    std::vector<Observation> observations;
    Simulation::RunStatus run_status = Simulation::RunStatus::Quiescent;
};

struct RunOptions {
    bool build_trace = true; // Monte-Carlo batteries skip the trace text
};

// Executes the two-phase protocol over the simulated network: mask rows and
// share distribution, masked-ballot commitment rounds, the all-commitments
// barrier, opening rounds, and the tally read off the public chain.
ElectionResult run_election(const ScenarioConfig& config, const RunOptions& options = {});

// Recomputes the tally from public chain data alone. Throws IncompleteChain
// unless every committed ballot has an admitted opening.
std::uint64_t self_tally(const Blockchain& chain);

} // namespace qvote

#pragma once

#include "qvote/commitment.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qvote {

using ordered_json = nlohmann::ordered_json;

struct AdversarySpec {
    enum class Role {
        DuplicateVoter,  // submits a second, different ballot
        Rebinder,        // opens a forged value after committing
        EarlyOpener,     // miner peeks at commitments before the tally phase
        Tamperer,        // corrupts one classical message in flight
        ColluderSet,     // voters pooling their views (drives the audit)
        WithholdOpening, // never opens
    };

    Role role = Role::DuplicateVoter;
    std::uint32_t target_voter = 1;
    std::uint32_t target_miner = 1;
    std::optional<std::uint64_t> rebind_value;
    std::vector<std::uint32_t> colluders;

    static const char* role_name(Role role);
    static Role role_from_name(const std::string& name); // throws InvalidConfig

    ordered_json to_json() const;
    static AdversarySpec from_json(const ordered_json& j);
};

struct ScenarioConfig {
    std::uint32_t n_voters = 0;
    std::uint32_t m_miners = 0;
    std::vector<std::uint32_t> votes; // empty with random_votes set, else one per voter
    bool random_votes = false;
    CommitMode mode = CommitMode::Ideal;
    double p_detect = 1.0;
    std::optional<AdversarySpec> adversary;
    std::uint64_t seed = 0;
    std::uint64_t tick_limit = 100000;
    bool batch_blocks = false;

    void validate() const; // throws InvalidConfig

    ordered_json to_json() const;
    static ScenarioConfig from_json(const ordered_json& j);
    static ScenarioConfig from_file(const std::string& path);
};

} // namespace qvote

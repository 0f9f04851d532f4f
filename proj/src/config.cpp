#include "qvote/config.hpp"

#include "qvote/error.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace qvote {

const char* AdversarySpec::role_name(Role role) {
    switch (role) {
    case Role::DuplicateVoter: return "double-vote";
    case Role::Rebinder: return "rebind";
    case Role::EarlyOpener: return "early-open";
    case Role::Tamperer: return "tamper";
    case Role::ColluderSet: return "collude";
    case Role::WithholdOpening: return "withhold";
    }
    return "unknown";
}

AdversarySpec::Role AdversarySpec::role_from_name(const std::string& name) {
    if (name == "double-vote")
        return Role::DuplicateVoter;
    if (name == "rebind")
        return Role::Rebinder;
    if (name == "early-open")
        return Role::EarlyOpener;
    if (name == "tamper")
        return Role::Tamperer;
    if (name == "collude")
        return Role::ColluderSet;
    if (name == "withhold")
        return Role::WithholdOpening;
    throw Error(Errc::InvalidConfig, "unknown adversary role: " + name);
}

ordered_json AdversarySpec::to_json() const {
    ordered_json j;
    j["role"] = role_name(role);
    j["voter"] = target_voter;
    j["miner"] = target_miner;
    if (rebind_value)
        j["rebind_value"] = *rebind_value;
    if (!colluders.empty())
        j["colluders"] = colluders;
    return j;
}

AdversarySpec AdversarySpec::from_json(const ordered_json& j) {
    AdversarySpec spec;
    spec.role = role_from_name(j.at("role").get<std::string>());
    if (j.contains("voter"))
        spec.target_voter = j.at("voter").get<std::uint32_t>();
    if (j.contains("miner"))
        spec.target_miner = j.at("miner").get<std::uint32_t>();
    if (j.contains("rebind_value"))
        spec.rebind_value = j.at("rebind_value").get<std::uint64_t>();
    if (j.contains("colluders"))
        spec.colluders = j.at("colluders").get<std::vector<std::uint32_t>>();
    return spec;
}

void ScenarioConfig::validate() const {
    if (n_voters < 1)
        throw Error(Errc::InvalidConfig, "n_voters must be at least 1");
    if (m_miners < 1)
        throw Error(Errc::InvalidConfig, "m_miners must be at least 1");
    if (!random_votes) {
        if (votes.size() != n_voters)
            throw Error(Errc::InvalidConfig, "votes list length must equal n_voters");
        for (std::uint32_t v : votes)
            if (v > 1)
                throw Error(Errc::InvalidConfig, "votes must be 0 or 1");
    }
    if (p_detect < 0.0 || p_detect > 1.0)
        throw Error(Errc::InvalidConfig, "p_detect must lie in [0,1]");
    if (tick_limit == 0)
        throw Error(Errc::InvalidConfig, "tick_limit must be positive");
    if (adversary) {
        const AdversarySpec& a = *adversary;
        if (a.role != AdversarySpec::Role::ColluderSet) {
            if (a.target_voter < 1 || a.target_voter > n_voters)
                throw Error(Errc::InvalidConfig, "adversary voter outside roster");
        }
        if (a.role == AdversarySpec::Role::EarlyOpener ||
            a.role == AdversarySpec::Role::Tamperer) {
            if (a.target_miner < 1 || a.target_miner > m_miners)
                throw Error(Errc::InvalidConfig, "adversary miner outside roster");
        }
        std::set<std::uint32_t> seen;
        for (std::uint32_t c : a.colluders) {
            if (c < 1 || c > n_voters)
                throw Error(Errc::InvalidConfig, "colluder outside roster");
            if (!seen.insert(c).second)
                throw Error(Errc::InvalidConfig, "duplicate colluder");
        }
    }
}

ordered_json ScenarioConfig::to_json() const {
    ordered_json j;
    j["n_voters"] = n_voters;
    j["m_miners"] = m_miners;
    if (random_votes)
        j["votes"] = "random";
    else
        j["votes"] = votes;
    ordered_json cj;
    cj["mode"] = mode == CommitMode::Ideal ? "ideal" : "cheat-sensitive";
    if (mode == CommitMode::CheatSensitive)
        cj["p_detect"] = p_detect;
    j["commitment"] = std::move(cj);
    j["seed"] = seed;
    j["tick_limit"] = tick_limit;
    j["batch_blocks"] = batch_blocks;
    if (adversary)
        j["adversary"] = adversary->to_json();
    return j;
}

ScenarioConfig ScenarioConfig::from_json(const ordered_json& j) {
    ScenarioConfig config;
    try {
        config.n_voters = j.at("n_voters").get<std::uint32_t>();
        config.m_miners = j.at("m_miners").get<std::uint32_t>();
        const auto& votes = j.at("votes");
        if (votes.is_string()) {
            if (votes.get<std::string>() != "random")
                throw Error(Errc::InvalidConfig, "votes must be a list or \"random\"");
            config.random_votes = true;
        } else {
            config.votes = votes.get<std::vector<std::uint32_t>>();
        }
        if (j.contains("commitment")) {
            const auto& cj = j.at("commitment");
            const std::string mode = cj.at("mode").get<std::string>();
            if (mode == "ideal") {
                config.mode = CommitMode::Ideal;
            } else if (mode == "cheat-sensitive") {
                config.mode = CommitMode::CheatSensitive;
                config.p_detect = cj.at("p_detect").get<double>();
            } else {
                throw Error(Errc::InvalidConfig, "unknown commitment mode: " + mode);
            }
        }
        if (!j.contains("seed"))
            throw Error(Errc::InvalidConfig, "seed is mandatory");
        config.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("tick_limit"))
            config.tick_limit = j.at("tick_limit").get<std::uint64_t>();
        if (j.contains("batch_blocks"))
            config.batch_blocks = j.at("batch_blocks").get<bool>();
        if (j.contains("adversary") && !j.at("adversary").is_null())
            config.adversary = AdversarySpec::from_json(j.at("adversary"));
    } catch (const ordered_json::exception& e) {
        throw Error(Errc::InvalidConfig, std::string("malformed config: ") + e.what());
    }
    config.validate();
    return config;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::InvalidConfig, "cannot read config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    ordered_json j;
    try {
        j = ordered_json::parse(buffer.str());
    } catch (const ordered_json::exception& e) {
        throw Error(Errc::InvalidConfig, std::string("config is not valid json: ") + e.what());
    }
    return from_json(j);
}

} // namespace qvote

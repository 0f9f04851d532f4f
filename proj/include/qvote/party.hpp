#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace qvote {

// Roles are disjoint by construction; indices are 1-based like the paper's
// V_1..V_n. Observers are read-only parties used for self-tallying checks.
struct PartyId {
    enum class Kind : std::uint8_t { Voter = 0, Miner = 1, Observer = 2 };

    Kind kind = Kind::Observer;
    std::uint32_t index = 0;

    auto operator<=>(const PartyId&) const = default;

    std::string label() const;

    static PartyId voter(std::uint32_t i) { return {Kind::Voter, i}; }
    static PartyId miner(std::uint32_t i) { return {Kind::Miner, i}; }
    static PartyId observer(std::uint32_t i = 1) { return {Kind::Observer, i}; }
};

std::uint64_t party_key(PartyId p); // dense ordering key, also used in hashes

} // namespace qvote

template <> struct std::hash<qvote::PartyId> {
    std::size_t operator()(const qvote::PartyId& p) const noexcept {
        return std::hash<std::uint64_t>{}(qvote::party_key(p));
    }
};

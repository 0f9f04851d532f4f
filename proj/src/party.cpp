#include "qvote/party.hpp"

namespace qvote {

std::string PartyId::label() const {
    const char prefix = kind == Kind::Voter ? 'V' : kind == Kind::Miner ? 'M' : 'O';
    return prefix + std::to_string(index);
}

std::uint64_t party_key(PartyId p) {
    return (static_cast<std::uint64_t>(p.kind) << 32) | p.index;
}

} // namespace qvote

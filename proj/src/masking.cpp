#include "qvote/masking.hpp"

#include "qvote/error.hpp"

#include <string>
#include <vector>

namespace qvote {

Modulus::Modulus(std::uint32_t n_voters) : n_(n_voters) {
    if (n_voters == 0)
        throw Error(Errc::InvalidVoterCount, "need at least one voter");
}

Vote::Vote(std::uint32_t v) : v_(v) {
    if (v > 1)
        throw Error(Errc::ValueOutOfRange, "vote must be 0 or 1, got " + std::to_string(v));
}

MaskRow gen_mask_row(std::uint32_t owner, std::uint32_t n, Rng& rng) {
    const Modulus mod(n);
    MaskRow row;
    row.owner = owner;
    row.entries.reserve(n);

    std::uint64_t sum = 0;
    for (std::uint32_t j = 0; j + 1 < n; ++j) {
        const std::uint64_t r = rng.uniform(mod.value());
        row.entries.push_back(r);
        sum = mod.reduce(sum + r);
    }
    // Last entry closes the row: (m - sum) mod m.
    row.entries.push_back(mod.reduce(mod.value() - sum));
    return row;
}

MaskedBallot mask_ballot(Vote vote, const MaskColumn& column, const Modulus& modulus) {
    const std::uint32_t n = modulus.voters();
    if (column.shares.size() != n)
        throw Error(Errc::MalformedColumn, "expected " + std::to_string(n) + " shares, got " +
                                               std::to_string(column.shares.size()));
    std::uint64_t sum = vote.value();
    for (std::uint64_t share : column.shares) {
        if (!modulus.in_range(share))
            throw Error(Errc::MalformedColumn,
                        "share " + std::to_string(share) + " out of range mod " +
                            std::to_string(modulus.value()));
        sum = modulus.reduce(sum + share);
    }
    return MaskedBallot{column.receiver, sum};
}

std::uint64_t tally(std::span<const MaskedBallot> ballots, const Modulus& modulus) {
    const std::uint32_t n = modulus.voters();
    if (ballots.size() != n)
        throw Error(Errc::IncompleteBallotSet, "expected " + std::to_string(n) + " ballots, got " +
                                                   std::to_string(ballots.size()));
    std::vector<bool> seen(n + 1, false);
    std::uint64_t sum = 0;
    for (const MaskedBallot& b : ballots) {
        if (b.voter < 1 || b.voter > n)
            throw Error(Errc::IncompleteBallotSet,
                        "ballot from unknown voter index " + std::to_string(b.voter));
        if (seen[b.voter])
            throw Error(Errc::IncompleteBallotSet,
                        "duplicate ballot for voter " + std::to_string(b.voter));
        seen[b.voter] = true;
        if (!modulus.in_range(b.value))
            throw Error(Errc::ValueOutOfRange, "masked ballot out of range");
        sum = modulus.reduce(sum + b.value);
    }
    return sum;
}

} // namespace qvote

#pragma once

#include "qvote/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace qvote {

// All residue arithmetic for an n-voter election happens mod n+1. Since votes
// are binary, the sum of votes is at most n and the tally residue decodes to
// the exact agree-count.
class Modulus {
  public:
    explicit Modulus(std::uint32_t n_voters); // throws InvalidVoterCount if n == 0

    std::uint32_t voters() const { return n_; }
    std::uint64_t value() const { return static_cast<std::uint64_t>(n_) + 1; }
    std::uint64_t reduce(std::uint64_t x) const { return x % value(); }
    bool in_range(std::uint64_t residue) const { return residue < value(); }

  private:
    std::uint32_t n_;
};

class Vote {
  public:
    explicit Vote(std::uint32_t v); // throws ValueOutOfRange unless v is 0 or 1
    std::uint32_t value() const { return v_; }

  private:
    std::uint32_t v_;
};

// Row i of the mask matrix, generated by voter i: n residues summing to
// 0 mod n+1. Entry j is the share sent to voter j.
struct MaskRow {
    std::uint32_t owner = 0;
    std::vector<std::uint64_t> entries;
};

// Column i as accumulated by voter i: one share received from each voter,
// including the diagonal share kept locally.
struct MaskColumn {
    std::uint32_t receiver = 0;
    std::vector<std::uint64_t> shares;
};

struct MaskedBallot {
    std::uint32_t voter = 0;
    std::uint64_t value = 0;
};

// First n-1 entries drawn uniformly on Z_{n+1}; the last entry is the unique
// residue closing the row sum to 0. This is the uniform distribution on the
// solution set of the row constraint.
MaskRow gen_mask_row(std::uint32_t owner, std::uint32_t n, Rng& rng);

// v-hat = (v + sum of received shares) mod n+1.
MaskedBallot mask_ballot(Vote vote, const MaskColumn& column, const Modulus& modulus);

// Sum of masked ballots mod n+1, decoded as the number of agree-votes.
// Requires exactly one ballot per voter index 1..n.
std::uint64_t tally(std::span<const MaskedBallot> ballots, const Modulus& modulus);

} // namespace qvote

#include "qvote/masking.hpp"

#include "qvote/error.hpp"
#include "support/stats.hpp"

#include <doctest.h>

#include <cstdint>
#include <numeric>
#include <vector>

using namespace qvote;

namespace {

// Plaintext oracle: the agree-count with no masking involved.
std::uint64_t plain_sum(const std::vector<std::uint32_t>& votes) {
    return std::accumulate(votes.begin(), votes.end(), std::uint64_t{0});
}

// Independent re-summation of a row with plain integer arithmetic.
std::uint64_t resum_mod(const std::vector<std::uint64_t>& entries, std::uint64_t m) {
    std::uint64_t s = 0;
    for (auto e : entries)
        s += e;
    return s % m;
}

// Full mask-and-tally pipeline for a given vote vector, masks drawn from rng.
std::uint64_t masked_tally(const std::vector<std::uint32_t>& votes, Rng& rng) {
    const auto n = static_cast<std::uint32_t>(votes.size());
    const Modulus mod(n);
    std::vector<MaskRow> rows;
    for (std::uint32_t i = 1; i <= n; ++i)
        rows.push_back(gen_mask_row(i, n, rng));

    std::vector<MaskedBallot> ballots;
    for (std::uint32_t i = 1; i <= n; ++i) {
        MaskColumn col;
        col.receiver = i;
        for (std::uint32_t j = 0; j < n; ++j)
            col.shares.push_back(rows[j].entries[i - 1]);
        ballots.push_back(mask_ballot(Vote(votes[i - 1]), col, mod));
    }
    return tally(ballots, mod);
}

} // namespace

TEST_CASE("modulus and vote domain checks") {
    CHECK_THROWS_AS(Modulus(0), Error);
    CHECK(Modulus(1).value() == 2);
    CHECK(Modulus(5).value() == 6);
    CHECK_THROWS_AS(Vote(2), Error);
    CHECK(Vote(1).value() == 1);
}

TEST_CASE("single voter row is [0]") {
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 977ULL}) {
        Rng rng(seed);
        MaskRow row = gen_mask_row(1, 1, rng);
        REQUIRE(row.entries.size() == 1);
        CHECK(row.entries[0] == 0);
    }
}

TEST_CASE("last row entry is forced by the first n-1 draws") {
    // Find a seed whose first two uniform draws mod 4 are 1 and 2; the closing
    // entry must then be (-1-2) mod 4 = 1.
    bool found = false;
    for (std::uint64_t seed = 0; seed < 4096 && !found; ++seed) {
        Rng probe(seed);
        if (probe.uniform(4) == 1 && probe.uniform(4) == 2) {
            Rng rng(seed);
            MaskRow row = gen_mask_row(1, 3, rng);
            CHECK(row.entries == std::vector<std::uint64_t>{1, 2, 1});
            found = true;
        }
    }
    REQUIRE(found);
}

TEST_CASE("rows over 1000 seeds re-sum to zero mod n+1") {
    const std::uint32_t n = 5;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng(seed);
        MaskRow row = gen_mask_row(2, n, rng);
        REQUIRE(row.entries.size() == n);
        for (auto e : row.entries)
            CHECK(e < n + 1);
        CHECK(resum_mod(row.entries, n + 1) == 0);
    }
}

TEST_CASE("row-sum invariant holds across n in [1,50]") {
    Rng rng(7);
    for (std::uint32_t n = 1; n <= 50; ++n) {
        MaskRow row = gen_mask_row(1, n, rng);
        CHECK(resum_mod(row.entries, n + 1) == 0);
    }
    CHECK_THROWS_AS(gen_mask_row(1, 0, rng), Error);
}

TEST_CASE("identical seeds produce identical rows") {
    Rng a(123456);
    Rng b(123456);
    for (int i = 0; i < 20; ++i) {
        MaskRow ra = gen_mask_row(1, 9, a);
        MaskRow rb = gen_mask_row(1, 9, b);
        CHECK(ra.entries == rb.entries);
    }
}

TEST_CASE("free row entries are uniform on Z_{n+1}") {
    const std::uint32_t n = 5;
    const std::size_t samples = 10000;
    std::vector<std::vector<std::uint64_t>> counts(n - 1, std::vector<std::uint64_t>(n + 1, 0));
    Rng rng(20240917);
    for (std::size_t s = 0; s < samples; ++s) {
        MaskRow row = gen_mask_row(1, n, rng);
        for (std::uint32_t j = 0; j + 1 < n; ++j)
            counts[j][row.entries[j]]++;
    }
    for (std::uint32_t j = 0; j + 1 < n; ++j)
        CHECK(testsupport::uniform_chi_square_ok(counts[j]));
}

TEST_CASE("mask_ballot arithmetic") {
    const Modulus mod3(3);
    CHECK(mask_ballot(Vote(0), MaskColumn{1, {0, 0, 0}}, mod3).value == 0);
    CHECK(mask_ballot(Vote(1), MaskColumn{1, {1, 2, 3}}, mod3).value == 3); // (1+6) mod 4
    CHECK(mask_ballot(Vote(1), MaskColumn{1, {3, 3, 3}}, mod3).value == 2); // (1+9) mod 4

    CHECK_THROWS_AS(mask_ballot(Vote(0), MaskColumn{1, {0, 0}}, mod3), Error);
    CHECK_THROWS_AS(mask_ballot(Vote(0), MaskColumn{1, {0, 4, 0}}, mod3), Error);
}

TEST_CASE("tally arithmetic and ballot-set validation") {
    const Modulus mod3(3);
    std::vector<MaskedBallot> zeros{{1, 0}, {2, 0}, {3, 0}};
    CHECK(tally(zeros, mod3) == 0);

    const Modulus mod4(4);
    std::vector<MaskedBallot> four{{1, 3}, {2, 2}, {3, 1}, {4, 0}};
    CHECK(tally(four, mod4) == 1); // 6 mod 5

    std::vector<MaskedBallot> missing{{1, 0}, {2, 0}};
    CHECK_THROWS_AS(tally(missing, mod3), Error);
    std::vector<MaskedBallot> dup{{1, 0}, {1, 0}, {3, 0}};
    CHECK_THROWS_AS(tally(dup, mod3), Error);
}

TEST_CASE("end-to-end masked tally equals plaintext sum") {
    Rng rng(42);
    CHECK(masked_tally({1, 0, 1}, rng) == 2);

    // Congruence chain over random votes and matrices for every n in [1,50].
    Rng driver(991);
    for (std::uint32_t n = 1; n <= 50; ++n) {
        for (int rep = 0; rep < 8; ++rep) {
            std::vector<std::uint32_t> votes(n);
            for (auto& v : votes)
                v = static_cast<std::uint32_t>(driver.uniform(2));
            CHECK(masked_tally(votes, driver) == plain_sum(votes));
        }
    }

    // All vote vectors exhaustively for small n.
    for (std::uint32_t n = 1; n <= 6; ++n) {
        for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
            std::vector<std::uint32_t> votes(n);
            for (std::uint32_t i = 0; i < n; ++i)
                votes[i] = (bits >> i) & 1u;
            CHECK(masked_tally(votes, driver) == plain_sum(votes));
        }
    }
}

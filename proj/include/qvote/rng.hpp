#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace qvote {

// Deterministic random source. All randomness in a scenario flows through one
// instance seeded from the scenario seed, so a (config, seed) pair fully
// determines every run. Bounded draws use rejection sampling on the raw
// engine output; std::uniform_int_distribution is not portable across
// standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, bound). bound must be nonzero.
    std::uint64_t uniform(std::uint64_t bound);

    // True with probability p (clamped to [0,1]).
    bool bernoulli(double p);

    std::array<std::uint8_t, 16> bytes16();
    std::array<std::uint8_t, 32> bytes32();

    // Independent substream for a fixed purpose (key setup, audits).
    Rng fork(std::uint64_t stream_id);

  private:
    std::mt19937_64 engine_;
};

} // namespace qvote

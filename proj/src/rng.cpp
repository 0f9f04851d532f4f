#include "qvote/rng.hpp"

namespace qvote {

std::uint64_t Rng::uniform(std::uint64_t bound) {
    if (bound == 0)
        return 0;
    // Largest multiple of bound that fits in 64 bits; reject above it.
    const std::uint64_t limit = bound * (~std::uint64_t{0} / bound);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

bool Rng::bernoulli(double p) {
    if (p <= 0.0)
        return false;
    if (p >= 1.0)
        return true;
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return u < p;
}

std::array<std::uint8_t, 16> Rng::bytes16() {
    std::array<std::uint8_t, 16> out{};
    for (int i = 0; i < 2; ++i) {
        std::uint64_t w = engine_();
        for (int b = 0; b < 8; ++b)
            out[static_cast<std::size_t>(i * 8 + b)] = static_cast<std::uint8_t>(w >> (8 * b));
    }
    return out;
}

std::array<std::uint8_t, 32> Rng::bytes32() {
    std::array<std::uint8_t, 32> out{};
    for (int i = 0; i < 4; ++i) {
        std::uint64_t w = engine_();
        for (int b = 0; b < 8; ++b)
            out[static_cast<std::size_t>(i * 8 + b)] = static_cast<std::uint8_t>(w >> (8 * b));
    }
    return out;
}

Rng Rng::fork(std::uint64_t stream_id) {
    // Mix the child id with fresh engine output so sibling streams differ.
    const std::uint64_t base = engine_();
    return Rng(base ^ (stream_id * 0x9e3779b97f4a7c15ULL));
}

} // namespace qvote

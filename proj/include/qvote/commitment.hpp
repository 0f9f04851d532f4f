#pragma once

#include "qvote/hash.hpp"
#include "qvote/masking.hpp"
#include "qvote/party.hpp"
#include "qvote/rng.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace qvote {

// Two commitment backends behind one contract. Ideal is perfectly concealing
// and binding inside the simulation. CheatSensitive abstracts a
// cheat-sensitive quantum bit commitment into a single parameter: each
// cheated bit (rebound or peeked) is caught independently with probability
// p_detect. The quantum internals stay out of scope; only the contract is
// modeled.
enum class CommitMode { Ideal, CheatSensitive };

struct CommitmentParams {
    CommitMode mode = CommitMode::Ideal;
    double p_detect = 1.0;            // per-bit detection probability, CheatSensitive only
    std::uint32_t bit_width = 1;      // committed bits, enough for residue_bound-1
    std::uint64_t residue_bound = 2;  // n+1: committed values live in [0, n]

    static CommitmentParams ideal(const Modulus& mod);
    static CommitmentParams cheat_sensitive(const Modulus& mod, double p_detect);
};

std::uint32_t bits_for_bound(std::uint64_t residue_bound);

enum class CommitPhase : std::uint8_t { Committed = 0, Opened = 1 };

// A multi-bit value is committed as bit_width independent bit commitments;
// evidence holds one digest per bit. sim_value is simulator bookkeeping (the
// true committed value) used only by adversarial operations and test oracles.
// It is excluded from transcript_bytes(), which is all other parties ever see.
struct Commitment {
    PartyId committer;
    std::vector<Digest> evidence;
    CommitPhase phase = CommitPhase::Committed;
    std::uint64_t sim_value = 0;

    Bytes transcript_bytes() const;
};

struct Opening {
    std::uint64_t value = 0;
    std::vector<std::array<std::uint8_t, 16>> nonces;

    // Set by adversarial_rebind. Models the physics the digests cannot: which
    // bits were re-bound, and which of those attempts the receiver catches.
    struct Forgery {
        std::vector<std::uint32_t> flipped_bits;
        std::vector<std::uint32_t> detected_bits;
    };
    std::optional<Forgery> forgery;
};

struct OpenResult {
    bool cheat_detected = false;
    std::uint64_t value = 0;
    std::vector<std::uint32_t> detected_bits;
};

// Commit/open per the two-phase contract. commit throws ValueOutOfRange for
// values outside [0, residue_bound). open throws AlreadyOpened on a second
// attempt; any attempt, honest or not, consumes the commitment.
std::pair<Commitment, Opening> commit(PartyId committer, std::uint64_t value,
                                      const CommitmentParams& params, Rng& rng);
OpenResult open(Commitment& commitment, const Opening& opening, const CommitmentParams& params);

struct RebindResult {
    Opening opening;
    std::vector<std::uint32_t> detections;
};

// Forge an opening for new_value from an honest one. Every flipped bit is
// detected in Ideal mode; independently with probability p_detect in
// CheatSensitive mode. Never fails to produce an attempt.
RebindResult adversarial_rebind(const Commitment& commitment, const Opening& honest_opening,
                                std::uint64_t new_value, const CommitmentParams& params, Rng& rng);

struct PeekResult {
    std::uint64_t guess = 0;
    std::vector<std::uint32_t> detections;
};

// Attempt to learn the committed value before opening. Ideal: the guess is
// uniform and independent of the value, nothing is disturbed. CheatSensitive:
// each probed bit is learned outright but trips detection with probability
// p_detect. Peeking never alters the committed value.
PeekResult adversarial_peek(const Commitment& commitment, std::uint32_t bits_to_probe,
                            const CommitmentParams& params, Rng& rng);

// Wire/ledger forms. Evidence bytes are the public transcript; opening bytes
// carry the forgery bookkeeping so that downstream open() calls replay the
// same detection outcome.
Bytes serialize_evidence(const Commitment& commitment);
Commitment deserialize_evidence(const Bytes& payload);
Bytes serialize_opening(const Opening& opening);
Opening deserialize_opening(const Bytes& payload);

} // namespace qvote

#include "qvote/commitment.hpp"

#include "qvote/bytes.hpp"
#include "qvote/error.hpp"

#include <algorithm>
#include <string>

namespace qvote {

namespace {

constexpr const char* kBitCommitTag = "qvote.bitcommit.v1";

Digest bit_evidence(PartyId committer, std::uint32_t bit_index, std::uint8_t bit,
                    const std::array<std::uint8_t, 16>& nonce) {
    ByteWriter w;
    w.str(kBitCommitTag);
    w.u64(party_key(committer));
    w.u32(bit_index);
    w.u8(bit);
    w.raw(nonce);
    return sha256(w.data());
}

std::uint8_t bit_of(std::uint64_t value, std::uint32_t index) {
    return static_cast<std::uint8_t>((value >> index) & 1u);
}

} // namespace

std::uint32_t bits_for_bound(std::uint64_t residue_bound) {
    std::uint32_t bits = 0;
    std::uint64_t top = residue_bound - 1;
    do {
        ++bits;
        top >>= 1;
    } while (top != 0);
    return bits;
}

CommitmentParams CommitmentParams::ideal(const Modulus& mod) {
    return CommitmentParams{CommitMode::Ideal, 1.0, bits_for_bound(mod.value()), mod.value()};
}

CommitmentParams CommitmentParams::cheat_sensitive(const Modulus& mod, double p_detect) {
    return CommitmentParams{CommitMode::CheatSensitive, p_detect, bits_for_bound(mod.value()),
                            mod.value()};
}

Bytes Commitment::transcript_bytes() const {
    ByteWriter w;
    w.u64(party_key(committer));
    w.u32(static_cast<std::uint32_t>(evidence.size()));
    for (const Digest& d : evidence)
        w.raw(d);
    return w.take();
}

std::pair<Commitment, Opening> commit(PartyId committer, std::uint64_t value,
                                      const CommitmentParams& params, Rng& rng) {
    if (value >= params.residue_bound)
        throw Error(Errc::ValueOutOfRange, "committed value " + std::to_string(value) +
                                               " not below " +
                                               std::to_string(params.residue_bound));
    Commitment c;
    c.committer = committer;
    c.sim_value = value;
    Opening o;
    o.value = value;
    for (std::uint32_t k = 0; k < params.bit_width; ++k) {
        const auto nonce = rng.bytes16();
        o.nonces.push_back(nonce);
        c.evidence.push_back(bit_evidence(committer, k, bit_of(value, k), nonce));
    }
    return {std::move(c), std::move(o)};
}

OpenResult open(Commitment& commitment, const Opening& opening, const CommitmentParams& params) {
    if (commitment.phase == CommitPhase::Opened)
        throw Error(Errc::AlreadyOpened, "commitment by " + commitment.committer.label());
    commitment.phase = CommitPhase::Opened;

    OpenResult result;
    result.value = opening.value;

    if (opening.value >= params.residue_bound ||
        opening.nonces.size() != commitment.evidence.size()) {
        result.cheat_detected = true;
        return result;
    }

    if (opening.forgery) {
        // Rebind attempt: detection outcome was sampled when the forgery was
        // made; an undetected forgery opens cleanly to the new value.
        result.detected_bits = opening.forgery->detected_bits;
        result.cheat_detected = !result.detected_bits.empty();
        return result;
    }

    for (std::uint32_t k = 0; k < commitment.evidence.size(); ++k) {
        const Digest expect =
            bit_evidence(commitment.committer, k, bit_of(opening.value, k), opening.nonces[k]);
        if (expect != commitment.evidence[k])
            result.detected_bits.push_back(k);
    }
    result.cheat_detected = !result.detected_bits.empty();
    return result;
}

RebindResult adversarial_rebind(const Commitment& commitment, const Opening& honest_opening,
                                std::uint64_t new_value, const CommitmentParams& params, Rng& rng) {
    RebindResult out;
    out.opening = honest_opening;
    out.opening.value = new_value;

    Opening::Forgery forgery;
    for (std::uint32_t k = 0; k < params.bit_width; ++k) {
        if (bit_of(commitment.sim_value, k) == bit_of(new_value, k))
            continue;
        forgery.flipped_bits.push_back(k);
        const bool caught =
            params.mode == CommitMode::Ideal ? true : rng.bernoulli(params.p_detect);
        if (caught)
            forgery.detected_bits.push_back(k);
    }
    out.detections = forgery.detected_bits;
    out.opening.forgery = std::move(forgery);
    return out;
}

PeekResult adversarial_peek(const Commitment& commitment, std::uint32_t bits_to_probe,
                            const CommitmentParams& params, Rng& rng) {
    PeekResult out;
    if (params.mode == CommitMode::Ideal) {
        // Perfectly concealing: the best available guess is noise.
        out.guess = rng.uniform(params.residue_bound);
        return out;
    }

    const std::uint32_t probed = std::min(bits_to_probe, params.bit_width);
    for (std::uint32_t k = 0; k < probed; ++k) {
        if (rng.bernoulli(params.p_detect))
            out.detections.push_back(k);
    }

    const std::uint64_t known_mask =
        probed >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << probed) - 1);
    const std::uint64_t known = commitment.sim_value & known_mask;
    // Unprobed high bits are guessed; keep the guess inside the residue range.
    std::uint64_t guess;
    do {
        guess = known | (rng.uniform(std::uint64_t{1} << (params.bit_width - probed)) << probed);
    } while (guess >= params.residue_bound);
    out.guess = guess;
    return out;
}

Bytes serialize_evidence(const Commitment& commitment) {
    ByteWriter w;
    w.u64(party_key(commitment.committer));
    w.u32(static_cast<std::uint32_t>(commitment.evidence.size()));
    for (const Digest& d : commitment.evidence)
        w.raw(d);
    return w.take();
}

Commitment deserialize_evidence(const Bytes& payload) {
    ByteReader r(payload);
    Commitment c;
    const std::uint64_t key = r.u64();
    c.committer.kind = static_cast<PartyId::Kind>(key >> 32);
    c.committer.index = static_cast<std::uint32_t>(key & 0xffffffffu);
    const std::uint32_t count = r.u32();
    for (std::uint32_t k = 0; k < count; ++k)
        c.evidence.push_back(r.fixed<32>());
    if (!r.done())
        throw Error(Errc::BadTrace, "trailing bytes after commitment evidence");
    return c;
}

Bytes serialize_opening(const Opening& opening) {
    ByteWriter w;
    w.u64(opening.value);
    w.u32(static_cast<std::uint32_t>(opening.nonces.size()));
    for (const auto& nonce : opening.nonces)
        w.raw(nonce);
    w.u8(opening.forgery ? 1 : 0);
    if (opening.forgery) {
        w.u32(static_cast<std::uint32_t>(opening.forgery->flipped_bits.size()));
        for (auto b : opening.forgery->flipped_bits)
            w.u32(b);
        w.u32(static_cast<std::uint32_t>(opening.forgery->detected_bits.size()));
        for (auto b : opening.forgery->detected_bits)
            w.u32(b);
    }
    return w.take();
}

Opening deserialize_opening(const Bytes& payload) {
    ByteReader r(payload);
    Opening o;
    o.value = r.u64();
    const std::uint32_t count = r.u32();
    for (std::uint32_t k = 0; k < count; ++k)
        o.nonces.push_back(r.fixed<16>());
    if (r.u8() != 0) {
        Opening::Forgery f;
        const std::uint32_t nf = r.u32();
        for (std::uint32_t k = 0; k < nf; ++k)
            f.flipped_bits.push_back(r.u32());
        const std::uint32_t nd = r.u32();
        for (std::uint32_t k = 0; k < nd; ++k)
            f.detected_bits.push_back(r.u32());
        o.forgery = std::move(f);
    }
    if (!r.done())
        throw Error(Errc::BadTrace, "trailing bytes after opening");
    return o;
}

} // namespace qvote

#include "qvote/ledger.hpp"

#include "qvote/bytes.hpp"
#include "qvote/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <utility>

using ordered_json = nlohmann::ordered_json;

namespace qvote {

std::vector<PartyId> Roster::voters() const {
    std::vector<PartyId> out;
    for (std::uint32_t i = 1; i <= n_voters; ++i)
        out.push_back(PartyId::voter(i));
    return out;
}

std::vector<PartyId> Roster::miners() const {
    std::vector<PartyId> out;
    for (std::uint32_t i = 1; i <= m_miners; ++i)
        out.push_back(PartyId::miner(i));
    return out;
}

std::vector<PartyId> Roster::all_nodes() const {
    std::vector<PartyId> out = voters();
    const std::vector<PartyId> ms = miners();
    out.insert(out.end(), ms.begin(), ms.end());
    out.push_back(PartyId::observer());
    return out;
}

namespace {

std::pair<std::uint64_t, std::uint64_t> normalized_pair(PartyId a, PartyId b) {
    const std::uint64_t ka = party_key(a);
    const std::uint64_t kb = party_key(b);
    return ka <= kb ? std::make_pair(ka, kb) : std::make_pair(kb, ka);
}

} // namespace

AuthKeyTable AuthKeyTable::generate(const Roster& roster, Rng& rng) {
    AuthKeyTable table;
    // Every pair of protocol participants shares a key (the QKD stand-in).
    std::vector<PartyId> parties = roster.voters();
    const std::vector<PartyId> ms = roster.miners();
    parties.insert(parties.end(), ms.begin(), ms.end());
    for (std::size_t i = 0; i < parties.size(); ++i)
        for (std::size_t j = i + 1; j < parties.size(); ++j)
            table.keys_[normalized_pair(parties[i], parties[j])] = rng.bytes32();
    return table;
}

bool AuthKeyTable::has_pair(PartyId a, PartyId b) const {
    return keys_.count(normalized_pair(a, b)) != 0;
}

const AuthKeyTable::Key& AuthKeyTable::pair_key(PartyId a, PartyId b) const {
    auto it = keys_.find(normalized_pair(a, b));
    if (it == keys_.end())
        throw Error(Errc::NoChannel, "no key for " + a.label() + "," + b.label());
    return it->second;
}

Digest AuthKeyTable::tag(PartyId sender, PartyId receiver,
                         std::span<const std::uint8_t> content) const {
    ByteWriter w;
    w.u64(party_key(sender));
    w.u64(party_key(receiver));
    w.bytes(content);
    return hmac_sha256(pair_key(sender, receiver), w.data());
}

bool AuthKeyTable::verify_tag(PartyId sender, PartyId receiver,
                              std::span<const std::uint8_t> content, const Digest& tag_value) const {
    if (!has_pair(sender, receiver))
        return false;
    return tag(sender, receiver, content) == tag_value;
}

const char* record_kind_name(RecordKind kind) {
    return kind == RecordKind::BallotCommitment ? "commitment" : "opening";
}

Bytes record_content_bytes(const UpdateRecord& record) {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(record.kind));
    w.u64(party_key(record.voter));
    w.bytes(record.payload);
    return w.take();
}

Digest record_digest(const UpdateRecord& record) {
    return sha256(record_content_bytes(record));
}

Digest block_digest(const LedgerBlock& block) {
    ByteWriter w;
    w.u64(block.height);
    w.raw(block.prev_digest);
    w.u32(static_cast<std::uint32_t>(block.records.size()));
    for (const UpdateRecord& r : block.records) {
        w.bytes(record_content_bytes(r));
        w.raw(r.auth_tag);
    }
    w.u8(block.decision.agreed_digest ? 1 : 0);
    if (block.decision.agreed_digest)
        w.raw(*block.decision.agreed_digest);
    w.u8(block.decision.admitted ? 1 : 0);
    w.u32(block.decision.votes_for);
    w.u32(block.decision.votes_total);
    return sha256(w.data());
}

Blockchain::Blockchain() {
    LedgerBlock genesis;
    genesis.height = 0;
    blocks_.push_back(std::move(genesis));
}

void Blockchain::append(LedgerBlock block) {
    if (block.height != blocks_.size())
        throw Error(Errc::BadTrace, "non-consecutive block height");
    if (block.prev_digest != tip_digest())
        throw Error(Errc::BadTrace, "prev_digest does not chain");
    blocks_.push_back(std::move(block));
}

bool Blockchain::verify() const {
    for (std::size_t h = 0; h < blocks_.size(); ++h) {
        if (blocks_[h].height != h)
            return false;
        if (h == 0) {
            if (blocks_[0].prev_digest != zero_digest())
                return false;
        } else if (blocks_[h].prev_digest != block_digest(blocks_[h - 1])) {
            return false;
        }
    }
    return true;
}

std::uint32_t Blockchain::count(RecordKind kind) const {
    std::uint32_t n = 0;
    for (const LedgerBlock& b : blocks_)
        for (const UpdateRecord& r : b.records)
            if (r.kind == kind)
                ++n;
    return n;
}

const UpdateRecord* Blockchain::find(RecordKind kind, PartyId voter,
                                     std::uint64_t* height_out) const {
    for (const LedgerBlock& b : blocks_) {
        for (const UpdateRecord& r : b.records) {
            if (r.kind == kind && r.voter == voter) {
                if (height_out)
                    *height_out = b.height;
                return &r;
            }
        }
    }
    return nullptr;
}

namespace {

ordered_json decision_json(const ConsensusDecision& d) {
    ordered_json j;
    j["agreed"] = d.agreed_digest ? ordered_json(to_hex(*d.agreed_digest)) : ordered_json(nullptr);
    j["admitted"] = d.admitted;
    j["votes_for"] = d.votes_for;
    j["votes_total"] = d.votes_total;
    return j;
}

Digest digest_from_hex(const std::string& hex) {
    const Bytes raw = from_hex(hex);
    if (raw.size() != 32)
        throw Error(Errc::BadTrace, "digest must be 32 bytes");
    Digest d{};
    std::copy(raw.begin(), raw.end(), d.begin());
    return d;
}

PartyId party_from_label(const std::string& label) {
    if (label.size() < 2)
        throw Error(Errc::BadTrace, "bad party label: " + label);
    PartyId p;
    switch (label[0]) {
    case 'V': p.kind = PartyId::Kind::Voter; break;
    case 'M': p.kind = PartyId::Kind::Miner; break;
    case 'O': p.kind = PartyId::Kind::Observer; break;
    default: throw Error(Errc::BadTrace, "bad party label: " + label);
    }
    p.index = static_cast<std::uint32_t>(std::stoul(label.substr(1)));
    return p;
}

} // namespace

ordered_json block_to_json(const LedgerBlock& b) {
    ordered_json j;
    j["height"] = b.height;
    j["prev_digest"] = to_hex(b.prev_digest);
    j["digest"] = to_hex(block_digest(b));
    ordered_json records = ordered_json::array();
    for (const UpdateRecord& r : b.records) {
        ordered_json rj;
        rj["kind"] = record_kind_name(r.kind);
        rj["voter"] = r.voter.label();
        rj["payload"] = to_hex(r.payload);
        rj["auth_tag"] = to_hex(r.auth_tag);
        records.push_back(std::move(rj));
    }
    j["records"] = std::move(records);
    j["decision"] = decision_json(b.decision);
    return j;
}

LedgerBlock block_from_json(const ordered_json& j) {
    try {
        LedgerBlock b;
        b.height = j.at("height").get<std::uint64_t>();
        b.prev_digest = digest_from_hex(j.at("prev_digest").get<std::string>());
        for (const auto& rj : j.at("records")) {
            UpdateRecord r;
            const std::string kind = rj.at("kind").get<std::string>();
            if (kind == "commitment")
                r.kind = RecordKind::BallotCommitment;
            else if (kind == "opening")
                r.kind = RecordKind::BallotOpening;
            else
                throw Error(Errc::BadTrace, "unknown record kind: " + kind);
            r.voter = party_from_label(rj.at("voter").get<std::string>());
            r.payload = from_hex(rj.at("payload").get<std::string>());
            r.auth_tag = digest_from_hex(rj.at("auth_tag").get<std::string>());
            b.records.push_back(std::move(r));
        }
        const auto& dj = j.at("decision");
        if (!dj.at("agreed").is_null())
            b.decision.agreed_digest = digest_from_hex(dj.at("agreed").get<std::string>());
        b.decision.admitted = dj.at("admitted").get<bool>();
        b.decision.votes_for = dj.at("votes_for").get<std::uint32_t>();
        b.decision.votes_total = dj.at("votes_total").get<std::uint32_t>();
        return b;
    } catch (const ordered_json::exception& e) {
        throw Error(Errc::BadTrace, std::string("malformed block json: ") + e.what());
    }
}

std::string Blockchain::to_jsonl() const {
    std::string out;
    for (const LedgerBlock& b : blocks_) {
        out += block_to_json(b).dump();
        out += '\n';
    }
    return out;
}

InclusionStatus verify_inclusion(PartyId voter, const Blockchain& chain) {
    InclusionStatus status;
    std::uint64_t h = 0;
    if (chain.find(RecordKind::BallotCommitment, voter, &h)) {
        status.committed = true;
        status.commit_height = h;
    }
    if (chain.find(RecordKind::BallotOpening, voter, &h)) {
        status.opened = true;
        status.open_height = h;
    }
    return status;
}

const char* reject_reason_name(RejectReason reason) {
    switch (reason) {
    case RejectReason::NotEligible: return "NotEligible";
    case RejectReason::AuthFailure: return "AuthFailure";
    case RejectReason::DuplicateBallot: return "DuplicateBallot";
    case RejectReason::DuplicateOpening: return "DuplicateOpening";
    case RejectReason::PhaseViolation: return "PhaseViolation";
    case RejectReason::MalformedPayload: return "MalformedPayload";
    case RejectReason::NoCommitment: return "NoCommitment";
    case RejectReason::CheatDetected: return "CheatDetected";
    case RejectReason::NotDelivered: return "NotDelivered";
    case RejectReason::NoQuorum: return "NoQuorum";
    case RejectReason::ConflictingVersions: return "ConflictingVersions";
    }
    return "Unknown";
}

LocalCheck local_consistency_check(PartyId miner, PartyId sender, const UpdateRecord& received,
                                   const Blockchain& local_chain, const AuthKeyTable& keys,
                                   const Roster& roster, const CommitmentParams& cparams) {
    LocalCheck check;
    check.opinion.miner = miner;
    check.opinion.update_digest = record_digest(received);
    check.opinion.admissible = false;

    auto fail = [&](RejectReason r) {
        check.reason = r;
        return check;
    };

    // Eligibility: ballots come from roster voters, about themselves.
    if (!roster.eligible_voter(sender) || sender != received.voter)
        return fail(RejectReason::NotEligible);

    // Authentication under the pairwise key for this miner.
    if (!keys.verify_tag(sender, miner, record_content_bytes(received), received.auth_tag))
        return fail(RejectReason::AuthFailure);

    const bool phase2 = local_chain.count(RecordKind::BallotCommitment) >= roster.n_voters;

    if (received.kind == RecordKind::BallotCommitment) {
        if (local_chain.find(RecordKind::BallotCommitment, received.voter))
            return fail(RejectReason::DuplicateBallot);
        if (phase2)
            return fail(RejectReason::PhaseViolation);
        Commitment evidence;
        try {
            evidence = deserialize_evidence(received.payload);
        } catch (const Error&) {
            return fail(RejectReason::MalformedPayload);
        }
        if (evidence.committer != received.voter ||
            evidence.evidence.size() != cparams.bit_width)
            return fail(RejectReason::MalformedPayload);
        check.opinion.admissible = true;
        return check;
    }

    // Opening path.
    if (!phase2)
        return fail(RejectReason::PhaseViolation);
    if (local_chain.find(RecordKind::BallotOpening, received.voter))
        return fail(RejectReason::DuplicateOpening);
    const UpdateRecord* committed = local_chain.find(RecordKind::BallotCommitment, received.voter);
    if (!committed)
        return fail(RejectReason::NoCommitment);

    Opening opening;
    Commitment evidence;
    try {
        opening = deserialize_opening(received.payload);
        evidence = deserialize_evidence(committed->payload);
    } catch (const Error&) {
        return fail(RejectReason::MalformedPayload);
    }
    const OpenResult result = open(evidence, opening, cparams);
    if (result.cheat_detected) {
        check.reason = RejectReason::CheatDetected;
        check.cheat = CheatEvent{received.voter, "opening_mismatch",
                                 "opening failed against on-chain commitment of " +
                                     received.voter.label()};
        return check;
    }
    check.opinion.admissible = true;
    return check;
}

LedgerSystem::LedgerSystem(Roster roster, AuthKeyTable keys, CommitmentParams cparams,
                           bool batch_blocks)
    : roster_(std::move(roster)), keys_(std::move(keys)), cparams_(cparams),
      batch_blocks_(batch_blocks) {
    for (PartyId node : roster_.all_nodes())
        chains_.emplace(node, Blockchain{});
}

SubmitResult LedgerSystem::submit_update(PartyId sender, RecordKind kind, const Bytes& payload) {
    UpdateRecord content;
    content.kind = kind;
    content.voter = sender;
    content.payload = payload;

    std::vector<std::optional<UpdateRecord>> per_miner;
    const Bytes body = record_content_bytes(content);
    for (PartyId miner : roster_.miners()) {
        UpdateRecord copy = content;
        // Off-roster senders hold no pairwise key; they can only fabricate.
        copy.auth_tag = keys_.has_pair(sender, miner) ? keys_.tag(sender, miner, body)
                                                      : zero_digest();
        per_miner.emplace_back(std::move(copy));
    }
    return process_delivery(sender, per_miner);
}

SubmitResult LedgerSystem::process_delivery(
    PartyId sender, const std::vector<std::optional<UpdateRecord>>& per_miner) {
    SubmitResult result;
    ++rounds_;

    const std::vector<PartyId> miners = roster_.miners();
    if (per_miner.size() != miners.size())
        throw Error(Errc::NoMiners, "expected one delivery slot per miner");

    std::vector<MinerOpinion> opinions;
    std::set<PartyId> honest;
    std::map<RejectReason, std::uint32_t> reason_counts;
    std::vector<CheatEvent> cheats;
    // Deliveries keyed by content digest so the agreed version can be looked
    // up after the round.
    std::map<Digest, UpdateRecord> versions;

    for (std::size_t i = 0; i < miners.size(); ++i) {
        const PartyId miner = miners[i];
        honest.insert(miner); // consensus faults are modeled at the test layer
        if (!per_miner[i]) {
            opinions.push_back({miner, std::nullopt, false});
            reason_counts[RejectReason::NotDelivered]++;
            continue;
        }
        LocalCheck check = local_consistency_check(miner, sender, *per_miner[i],
                                                   chains_.at(miner), keys_, roster_, cparams_);
        versions.emplace(*check.opinion.update_digest, *per_miner[i]);
        opinions.push_back(check.opinion);
        if (check.reason)
            reason_counts[*check.reason]++;
        // Every honest miner spots the same cheat; record it once.
        if (check.cheat && cheats.empty())
            cheats.push_back(*check.cheat);
    }

    result.decision = hsba_round(opinions, honest);

    if (!result.decision.admitted) {
        if (!result.decision.agreed_digest && !versions.empty() && reason_counts.empty()) {
            result.reason = RejectReason::ConflictingVersions;
        } else if (!reason_counts.empty()) {
            // Dominant local failure; deterministic tie-break by enum order.
            std::uint32_t best = 0;
            for (const auto& [reason, count] : reason_counts) {
                if (count > best) {
                    best = count;
                    result.reason = reason;
                }
            }
        } else {
            result.reason = RejectReason::NoQuorum;
        }
        // Cheat evidence surfaces even when (especially when) the update is
        // rejected.
        result.cheats = cheats;
        cheat_log_.insert(cheat_log_.end(), cheats.begin(), cheats.end());
        return result;
    }

    result.accepted = true;

    UpdateRecord canonical = versions.at(*result.decision.agreed_digest);
    // Store the tag for the lowest-indexed miner: one canonical byte string
    // on every replica.
    canonical.auth_tag = keys_.has_pair(sender, miners.front())
                             ? keys_.tag(sender, miners.front(), record_content_bytes(canonical))
                             : zero_digest();

    if (batch_blocks_) {
        pending_.push_back(std::move(canonical));
        pending_decisions_.push_back(result.decision);
        return result;
    }

    LedgerBlock block;
    block.height = chains_.begin()->second.next_height();
    block.prev_digest = chains_.begin()->second.tip_digest();
    block.records.push_back(std::move(canonical));
    block.decision = result.decision;
    result.block_height = block.height;
    append_everywhere(std::move(block));
    return result;
}

void LedgerSystem::flush_batch() {
    if (pending_.empty())
        return;
    LedgerBlock block;
    block.height = chains_.begin()->second.next_height();
    block.prev_digest = chains_.begin()->second.tip_digest();
    block.records = std::move(pending_);
    pending_.clear();

    // Aggregate decision over the batch: the weakest vote count carried.
    ConsensusDecision agg;
    agg.admitted = true;
    agg.votes_total = roster_.m_miners;
    agg.votes_for = roster_.m_miners;
    ByteWriter w;
    for (std::size_t i = 0; i < pending_decisions_.size(); ++i) {
        agg.votes_for = std::min(agg.votes_for, pending_decisions_[i].votes_for);
        if (pending_decisions_[i].agreed_digest)
            w.raw(*pending_decisions_[i].agreed_digest);
    }
    agg.agreed_digest = sha256(w.data());
    pending_decisions_.clear();
    block.decision = agg;
    append_everywhere(std::move(block));
}

const Blockchain& LedgerSystem::chain_of(PartyId node) const {
    auto it = chains_.find(node);
    if (it == chains_.end())
        it = chains_.find(PartyId::observer()); // non-node parties read the public copy
    return it->second;
}

void LedgerSystem::append_everywhere(LedgerBlock block) {
    for (auto& [node, chain] : chains_)
        chain.append(block);
}

} // namespace qvote

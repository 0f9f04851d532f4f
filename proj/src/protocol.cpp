#include "qvote/protocol.hpp"

#include "qvote/bytes.hpp"
#include "qvote/error.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace qvote {

namespace {

// Wire envelope for voter -> miner broadcasts. The update id is transport
// bookkeeping so duplicate submissions from one voter stay distinct rounds.
struct Envelope {
    std::uint8_t kind = 0;
    std::uint64_t update_id = 0;
    std::uint64_t voter_key = 0;
    Bytes payload;
    Digest auth_tag{};
};

Bytes encode_envelope(const Envelope& env) {
    ByteWriter w;
    w.u8(env.kind);
    w.u64(env.update_id);
    w.u64(env.voter_key);
    w.bytes(env.payload);
    w.raw(env.auth_tag);
    return w.take();
}

Envelope decode_envelope(const Bytes& data) {
    ByteReader r(data);
    Envelope env;
    env.kind = r.u8();
    env.update_id = r.u64();
    env.voter_key = r.u64();
    env.payload = r.bytes();
    env.auth_tag = r.fixed<32>();
    if (!r.done())
        throw Error(Errc::BadTrace, "trailing bytes after envelope");
    return env;
}

Bytes encode_share(std::uint32_t sender_index, std::uint64_t share) {
    ByteWriter w;
    w.u32(sender_index);
    w.u64(share);
    return w.take();
}

std::pair<std::uint32_t, std::uint64_t> decode_share(const Bytes& data) {
    ByteReader r(data);
    const std::uint32_t sender = r.u32();
    const std::uint64_t share = r.u64();
    return {sender, share};
}

struct VoterState {
    PartyId id;
    Vote vote{0};
    MaskRow row;
    std::vector<std::optional<std::uint64_t>> shares; // by sender index, 1-based
    std::uint32_t shares_received = 0;
    std::optional<MaskedBallot> masked;
    std::optional<Commitment> commitment; // carries the sim oracle value
    std::optional<Opening> opening;
};

// One in-flight broadcast: the copy each miner received (or lost).
struct PendingUpdate {
    PartyId sender;
    RecordKind kind = RecordKind::BallotCommitment;
    std::vector<std::optional<UpdateRecord>> per_miner;
    std::uint32_t resolved = 0;
};

class ElectionDriver {
  public:
    ElectionDriver(const ScenarioConfig& config, const RunOptions& options)
        : config_(config), rng_(config.seed), roster_{config.n_voters, config.m_miners},
          modulus_(config.n_voters),
          cparams_(config.mode == CommitMode::Ideal
                       ? CommitmentParams::ideal(modulus_)
                       : CommitmentParams::cheat_sensitive(modulus_, config.p_detect)),
          sim_(config.tick_limit, options.build_trace) {
        config_.validate();

        votes_ = config_.votes;
        if (config_.random_votes) {
            votes_.resize(config_.n_voters);
            for (auto& v : votes_)
                v = static_cast<std::uint32_t>(rng_.uniform(2));
        }

        AuthKeyTable keys = AuthKeyTable::generate(roster_, rng_);
        ledger_.emplace(roster_, std::move(keys), cparams_, config_.batch_blocks);
    }

    ElectionResult run();

  private:
    bool adversary_is(AdversarySpec::Role role) const {
        return config_.adversary && config_.adversary->role == role;
    }

    void setup_parties();
    void begin_commitment_phase();
    void voter_on_share(VoterState& voter, const Delivery& delivery);
    void broadcast_record(VoterState& voter, RecordKind kind, const Bytes& payload);
    void miner_on_record(std::uint32_t miner_index, const Delivery& delivery);
    void run_consensus(std::uint64_t update_id);
    void after_chain_growth();
    void begin_tally_phase();
    void early_opener_peek();
    ElectionResult finalize(Simulation::RunStatus status);

    ScenarioConfig config_;
    Rng rng_;
    Roster roster_;
    Modulus modulus_;
    CommitmentParams cparams_;
    Simulation sim_;
    std::optional<LedgerSystem> ledger_;

    std::vector<std::uint32_t> votes_;
    std::vector<VoterState> voters_;
    std::map<std::uint64_t, PendingUpdate> pending_;
    // Delivery order per (sender, miner) link resolves which update a failed
    // (unparseable) message belonged to; channels are order-preserving.
    std::map<std::pair<PartyId, PartyId>, std::vector<std::uint64_t>> in_flight_;
    std::uint64_t next_update_id_ = 0;
    std::uint32_t unflushed_rounds_ = 0;

    bool tally_phase_started_ = false;
    bool cheat_abort_ = false;
    std::string cheat_abort_detail_;
    bool tamper_armed_ = false;

    std::vector<RoundSummary> rounds_;
    std::vector<CheatEvent> cheats_;
    ordered_json adversary_outcome_;
};

ElectionResult ElectionDriver::run() {
    setup_parties();

    sim_.trace().event({{"tick", 0},
                        {"type", "block"},
                        {"detail", block_to_json(ledger_->observer_chain().blocks().front())}});

    sim_.at(0, [this] { begin_commitment_phase(); });
    const auto status = sim_.run();
    return finalize(status);
}

void ElectionDriver::setup_parties() {
    voters_.resize(config_.n_voters);
    for (std::uint32_t i = 1; i <= config_.n_voters; ++i) {
        VoterState& voter = voters_[i - 1];
        voter.id = PartyId::voter(i);
        voter.vote = Vote(votes_[i - 1]);
        voter.shares.assign(config_.n_voters + 1, std::nullopt);
        sim_.register_party(voter.id,
                            [this, &voter](const Delivery& d) { voter_on_share(voter, d); });
    }
    for (std::uint32_t j = 1; j <= config_.m_miners; ++j)
        sim_.register_party(PartyId::miner(j),
                            [this, j](const Delivery& d) { miner_on_record(j, d); });
    sim_.register_party(PartyId::observer(), [](const Delivery&) {});

    if (adversary_is(AdversarySpec::Role::Tamperer)) {
        const PartyId target_sender = PartyId::voter(config_.adversary->target_voter);
        const PartyId target_receiver = PartyId::miner(config_.adversary->target_miner);
        tamper_armed_ = true;
        sim_.set_tamper_rule([this, target_sender, target_receiver](const Delivery& d) {
            if (!tamper_armed_ || d.channel != ChannelKind::ClassicalAuth)
                return false;
            if (d.sender != target_sender || d.receiver != target_receiver)
                return false;
            tamper_armed_ = false; // one corrupted copy is the whole attack
            return true;
        });
    }
}

void ElectionDriver::begin_commitment_phase() {
    // Step 1(a)+(b): rows in voter order, shares out over the quantum channel.
    for (VoterState& voter : voters_) {
        voter.row = gen_mask_row(voter.id.index, config_.n_voters, rng_);
        for (std::uint32_t j = 1; j <= config_.n_voters; ++j) {
            const Bytes payload = encode_share(voter.id.index, voter.row.entries[j - 1]);
            sim_.send(voter.id, PartyId::voter(j), ChannelKind::QuantumSecure, payload);
        }
    }
}

void ElectionDriver::voter_on_share(VoterState& voter, const Delivery& delivery) {
    if (delivery.failed)
        return; // integrity failure on a share: the column stays incomplete
    auto [sender, share] = decode_share(delivery.payload);
    if (sender < 1 || sender > config_.n_voters || voter.shares[sender])
        return;
    voter.shares[sender] = share;
    if (++voter.shares_received < config_.n_voters)
        return;

    // Step 1(c): column complete; mask and commit.
    MaskColumn column;
    column.receiver = voter.id.index;
    for (std::uint32_t j = 1; j <= config_.n_voters; ++j)
        column.shares.push_back(*voter.shares[j]);
    voter.masked = mask_ballot(voter.vote, column, modulus_);

    auto [commitment, opening] = commit(voter.id, voter.masked->value, cparams_, rng_);
    voter.commitment = std::move(commitment);
    voter.opening = std::move(opening);
    broadcast_record(voter, RecordKind::BallotCommitment, serialize_evidence(*voter.commitment));

    if (adversary_is(AdversarySpec::Role::DuplicateVoter) &&
        voter.id.index == config_.adversary->target_voter) {
        // A second, different ballot: fresh commitment to another residue.
        const std::uint64_t other = (voter.masked->value + 1) % modulus_.value();
        auto [c2, o2] = commit(voter.id, other, cparams_, rng_);
        broadcast_record(voter, RecordKind::BallotCommitment, serialize_evidence(c2));
    }
}

void ElectionDriver::broadcast_record(VoterState& voter, RecordKind kind, const Bytes& payload) {
    const std::uint64_t update_id = next_update_id_++;
    PendingUpdate& pending = pending_[update_id];
    pending.sender = voter.id;
    pending.kind = kind;
    pending.per_miner.assign(config_.m_miners, std::nullopt);

    UpdateRecord content;
    content.kind = kind;
    content.voter = voter.id;
    content.payload = payload;
    const Bytes body = record_content_bytes(content);

    for (std::uint32_t j = 1; j <= config_.m_miners; ++j) {
        const PartyId miner = PartyId::miner(j);
        Envelope env;
        env.kind = static_cast<std::uint8_t>(kind);
        env.update_id = update_id;
        env.voter_key = party_key(voter.id);
        env.payload = payload;
        env.auth_tag = ledger_->keys().tag(voter.id, miner, body);
        in_flight_[{voter.id, miner}].push_back(update_id);
        sim_.send(voter.id, miner, ChannelKind::ClassicalAuth, encode_envelope(env));
    }
}

void ElectionDriver::miner_on_record(std::uint32_t miner_index, const Delivery& delivery) {
    auto& link_queue = in_flight_[{delivery.sender, delivery.receiver}];
    if (link_queue.empty())
        return; // stray traffic outside any broadcast
    const std::uint64_t update_id = link_queue.front();
    link_queue.erase(link_queue.begin());

    PendingUpdate& pending = pending_.at(update_id);
    if (!delivery.failed) {
        try {
            const Envelope env = decode_envelope(delivery.payload);
            UpdateRecord record;
            record.kind = static_cast<RecordKind>(env.kind);
            record.voter = pending.sender;
            record.payload = env.payload;
            record.auth_tag = env.auth_tag;
            pending.per_miner[miner_index - 1] = std::move(record);
        } catch (const Error&) {
            // Unparseable copy counts as undelivered.
        }
    }
    if (++pending.resolved == config_.m_miners) {
        ++unflushed_rounds_;
        sim_.at(sim_.now(), [this, update_id] { run_consensus(update_id); });
    }
}

void ElectionDriver::run_consensus(std::uint64_t update_id) {
    PendingUpdate pending = std::move(pending_.at(update_id));
    pending_.erase(update_id);

    const SubmitResult result = ledger_->process_delivery(pending.sender, pending.per_miner);

    RoundSummary summary;
    summary.round = ledger_->rounds_run();
    summary.kind = pending.kind;
    summary.voter = pending.sender;
    summary.admitted = result.accepted;
    summary.votes_for = result.decision.votes_for;
    summary.votes_total = result.decision.votes_total;
    summary.reason = result.reason;
    rounds_.push_back(summary);

    ordered_json detail;
    detail["round"] = summary.round;
    detail["kind"] = record_kind_name(summary.kind);
    detail["voter"] = summary.voter.label();
    detail["admitted"] = summary.admitted;
    detail["votes_for"] = summary.votes_for;
    detail["votes_total"] = summary.votes_total;
    detail["reason"] = result.reason ? ordered_json(reject_reason_name(*result.reason))
                                     : ordered_json(nullptr);
    sim_.trace().event({{"tick", sim_.now()}, {"type", "consensus"}, {"detail", std::move(detail)}});

    for (const CheatEvent& cheat : result.cheats)
        cheats_.push_back(cheat);
    if (result.reason == RejectReason::CheatDetected) {
        cheat_abort_ = true;
        cheat_abort_detail_ = "opening by " + pending.sender.label() + " flagged as cheating";
    }

    if (result.accepted && !config_.batch_blocks) {
        sim_.trace().event({{"tick", sim_.now()},
                            {"type", "block"},
                            {"detail", block_to_json(ledger_->observer_chain().tip())}});
    }

    if (--unflushed_rounds_ == 0) {
        if (config_.batch_blocks) {
            const std::uint64_t before = ledger_->observer_chain().blocks().size();
            ledger_->flush_batch();
            if (ledger_->observer_chain().blocks().size() != before)
                sim_.trace().event({{"tick", sim_.now()},
                                    {"type", "block"},
                                    {"detail", block_to_json(ledger_->observer_chain().tip())}});
        }
        after_chain_growth();
    }
}

void ElectionDriver::after_chain_growth() {
    if (!tally_phase_started_ && ledger_->all_commitments_on_chain()) {
        tally_phase_started_ = true;
        // Barrier reached: every ballot is committed on-chain; openings may
        // start next tick.
        sim_.at(sim_.now() + 1, [this] { begin_tally_phase(); });
    }
}

void ElectionDriver::begin_tally_phase() {
    if (adversary_is(AdversarySpec::Role::EarlyOpener))
        early_opener_peek();

    for (VoterState& voter : voters_) {
        if (adversary_is(AdversarySpec::Role::WithholdOpening) &&
            voter.id.index == config_.adversary->target_voter)
            continue; // never opens

        if (adversary_is(AdversarySpec::Role::Rebinder) &&
            voter.id.index == config_.adversary->target_voter) {
            const std::uint64_t target = config_.adversary->rebind_value
                                             ? *config_.adversary->rebind_value
                                             : (voter.masked->value + 1) % modulus_.value();
            auto forged =
                adversarial_rebind(*voter.commitment, *voter.opening, target, cparams_, rng_);
            broadcast_record(voter, RecordKind::BallotOpening,
                             serialize_opening(forged.opening));
            continue;
        }

        broadcast_record(voter, RecordKind::BallotOpening, serialize_opening(*voter.opening));
    }
}

void ElectionDriver::early_opener_peek() {
    // The curious miner probes every on-chain commitment at the barrier,
    // before any opening exists, and guesses the tally from the probes.
    const PartyId miner = PartyId::miner(config_.adversary->target_miner);
    std::uint64_t guess_sum = 0;
    std::vector<std::uint32_t> detections;
    for (VoterState& voter : voters_) {
        const PeekResult peek =
            adversarial_peek(*voter.commitment, cparams_.bit_width, cparams_, rng_);
        guess_sum = modulus_.reduce(guess_sum + peek.guess);
        for (std::uint32_t bit : peek.detections)
            detections.push_back(bit);
        if (!peek.detections.empty())
            cheats_.push_back({miner, "peek_detected",
                               miner.label() + " probed the commitment of " + voter.id.label()});
    }

    std::uint64_t truth = 0;
    for (std::uint32_t v : votes_)
        truth += v;

    adversary_outcome_["role"] = "early-open";
    adversary_outcome_["miner"] = miner.label();
    adversary_outcome_["guess"] = guess_sum;
    adversary_outcome_["correct"] = guess_sum == truth;
    adversary_outcome_["detections"] = detections.size();
    sim_.trace().event({{"tick", sim_.now()},
                        {"type", "peek"},
                        {"detail", ordered_json{{"miner", miner.label()},
                                                {"guess", guess_sum},
                                                {"probes", config_.n_voters}}}});
}

ElectionResult ElectionDriver::finalize(Simulation::RunStatus status) {
    ElectionResult result;
    result.run_status = status;
    result.votes = votes_;
    result.chain = ledger_->observer_chain();

    ElectionReport& report = result.report;
    report.config = config_;
    report.rounds = rounds_;
    report.cheats = cheats_;
    report.adversary_outcome = adversary_outcome_;

    const std::uint32_t commitments = result.chain.count(RecordKind::BallotCommitment);
    const std::uint32_t openings = result.chain.count(RecordKind::BallotOpening);

    if (status == Simulation::RunStatus::TimedOut) {
        report.aborted = true;
        report.abort_reason = "SimulationTimeout: tick limit reached";
    } else if (commitments < config_.n_voters) {
        std::string missing;
        for (const VoterState& voter : voters_) {
            if (!verify_inclusion(voter.id, result.chain).committed)
                missing += (missing.empty() ? "" : ",") + voter.id.label();
        }
        report.aborted = true;
        report.abort_reason = "CommitmentPhaseIncomplete: " + missing;
    } else if (cheat_abort_) {
        // A flagged opening voids the tally: the residue sum over a strict
        // subset of ballots decodes to nothing.
        report.aborted = true;
        report.abort_reason = "CheatDetected: " + cheat_abort_detail_;
    } else if (openings < config_.n_voters) {
        std::string missing;
        for (const VoterState& voter : voters_) {
            const auto status_v = verify_inclusion(voter.id, result.chain);
            if (status_v.committed && !status_v.opened)
                missing += (missing.empty() ? "" : ",") + voter.id.label();
        }
        report.aborted = true;
        report.abort_reason = "WithheldOpening: " + (missing.empty() ? "unknown" : missing);
    } else {
        report.tally = self_tally(result.chain);
    }

    for (const VoterState& voter : voters_)
        report.inclusion.push_back({voter.id, verify_inclusion(voter.id, result.chain)});

    sim_.trace().event(
        {{"tick", sim_.now()},
         {"type", "result"},
         {"detail",
          ordered_json{{"aborted", report.aborted},
                       {"reason", report.aborted ? ordered_json(report.abort_reason)
                                                 : ordered_json(nullptr)},
                       {"tally", report.tally ? ordered_json(*report.tally)
                                              : ordered_json(nullptr)}}}});

    result.trace = sim_.trace().text();
    result.observations = sim_.observations();
    return result;
}

} // namespace

ElectionResult run_election(const ScenarioConfig& config, const RunOptions& options) {
    ElectionDriver driver(config, options);
    return driver.run();
}

std::uint64_t self_tally(const Blockchain& chain) {
    const std::uint32_t n = chain.count(RecordKind::BallotCommitment);
    if (n == 0)
        throw Error(Errc::IncompleteChain, "no ballots on chain");

    std::uint64_t sum = 0;
    std::uint32_t opened = 0;
    for (const LedgerBlock& block : chain.blocks()) {
        for (const UpdateRecord& record : block.records) {
            if (record.kind != RecordKind::BallotOpening)
                continue;
            const Opening opening = deserialize_opening(record.payload);
            sum = (sum + opening.value) % (n + 1);
            ++opened;
        }
    }
    if (opened != n)
        throw Error(Errc::IncompleteChain, std::to_string(n - opened) + " openings missing");
    return sum;
}

ordered_json ElectionReport::to_json() const {
    ordered_json j;
    j["config"] = config.to_json();
    // Explicit ballots never leave the simulator; the echo keeps the shape.
    if (!config.random_votes)
        j["config"]["votes"] = "explicit";
    j["aborted"] = aborted;
    j["abort_reason"] = aborted ? ordered_json(abort_reason) : ordered_json(nullptr);
    j["tally"] = tally ? ordered_json(*tally) : ordered_json(nullptr);

    ordered_json inc = ordered_json::array();
    for (const VoterInclusionReport& v : inclusion) {
        ordered_json vj;
        vj["voter"] = v.voter.label();
        vj["committed"] = v.status.committed;
        vj["opened"] = v.status.opened;
        vj["commit_height"] = v.status.commit_height ? ordered_json(*v.status.commit_height)
                                                     : ordered_json(nullptr);
        vj["open_height"] =
            v.status.open_height ? ordered_json(*v.status.open_height) : ordered_json(nullptr);
        inc.push_back(std::move(vj));
    }
    j["inclusion"] = std::move(inc);

    ordered_json cj = ordered_json::array();
    for (const CheatEvent& c : cheats) {
        ordered_json e;
        e["party"] = c.party.label();
        e["kind"] = c.kind;
        e["detail"] = c.detail;
        cj.push_back(std::move(e));
    }
    j["cheats"] = std::move(cj);

    ordered_json rj = ordered_json::array();
    for (const RoundSummary& r : rounds) {
        ordered_json e;
        e["round"] = r.round;
        e["kind"] = record_kind_name(r.kind);
        e["voter"] = r.voter.label();
        e["admitted"] = r.admitted;
        e["votes_for"] = r.votes_for;
        e["votes_total"] = r.votes_total;
        e["reason"] =
            r.reason ? ordered_json(reject_reason_name(*r.reason)) : ordered_json(nullptr);
        rj.push_back(std::move(e));
    }
    j["rounds"] = std::move(rj);

    j["adversary_outcome"] = adversary_outcome.is_null() ? ordered_json(nullptr)
                                                         : adversary_outcome;
    return j;
}

} // namespace qvote

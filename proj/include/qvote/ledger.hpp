#pragma once

#include "qvote/commitment.hpp"
#include "qvote/consensus.hpp"
#include "qvote/hash.hpp"
#include "qvote/party.hpp"
#include "qvote/rng.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace qvote {

struct Roster {
    std::uint32_t n_voters = 0;
    std::uint32_t m_miners = 0;

    std::vector<PartyId> voters() const;
    std::vector<PartyId> miners() const;
    // Every party holding a chain copy: voters, miners and one observer.
    std::vector<PartyId> all_nodes() const;

    bool eligible_voter(PartyId p) const {
        return p.kind == PartyId::Kind::Voter && p.index >= 1 && p.index <= n_voters;
    }
    bool is_miner(PartyId p) const {
        return p.kind == PartyId::Kind::Miner && p.index >= 1 && p.index <= m_miners;
    }
};

// Pairwise symmetric keys standing in for QKD-derived key material; fixed per
// scenario seed and used only for message authentication.
class AuthKeyTable {
  public:
    using Key = std::array<std::uint8_t, 32>;

    static AuthKeyTable generate(const Roster& roster, Rng& rng);

    bool has_pair(PartyId a, PartyId b) const;
    const Key& pair_key(PartyId a, PartyId b) const; // throws NoChannel

    Digest tag(PartyId sender, PartyId receiver, std::span<const std::uint8_t> content) const;
    bool verify_tag(PartyId sender, PartyId receiver, std::span<const std::uint8_t> content,
                    const Digest& tag) const;

  private:
    std::map<std::pair<std::uint64_t, std::uint64_t>, Key> keys_;
};

enum class RecordKind : std::uint8_t { BallotCommitment = 0, BallotOpening = 1 };

const char* record_kind_name(RecordKind kind);

// One ballot-related update. The auth tag is per-receiver on the wire; the
// chain stores the tag for the lowest-indexed miner so replicas stay
// byte-identical. Consensus digests cover the content only.
struct UpdateRecord {
    RecordKind kind = RecordKind::BallotCommitment;
    PartyId voter;
    Bytes payload;
    Digest auth_tag{};
};

Bytes record_content_bytes(const UpdateRecord& record);
Digest record_digest(const UpdateRecord& record);

struct LedgerBlock {
    std::uint64_t height = 0;
    std::vector<UpdateRecord> records;
    ConsensusDecision decision;
    Digest prev_digest{};
};

Digest block_digest(const LedgerBlock& block);

// Stable-field-order JSON form used for chain export, trace block events and
// replay verification. Digests render as lowercase hex.
nlohmann::ordered_json block_to_json(const LedgerBlock& block);
LedgerBlock block_from_json(const nlohmann::ordered_json& j); // throws BadTrace

class Blockchain {
  public:
    Blockchain(); // starts at the genesis block

    // Appends after checking height and prev_digest continuity.
    void append(LedgerBlock block);

    const std::vector<LedgerBlock>& blocks() const { return blocks_; }
    const LedgerBlock& tip() const { return blocks_.back(); }
    std::uint64_t next_height() const { return blocks_.size(); }
    Digest tip_digest() const { return block_digest(blocks_.back()); }

    bool verify() const; // full-chain digest and height pass

    std::uint32_t count(RecordKind kind) const;
    const UpdateRecord* find(RecordKind kind, PartyId voter,
                             std::uint64_t* height_out = nullptr) const;

    // One block per line, stable field order, digests as lowercase hex.
    std::string to_jsonl() const;

  private:
    std::vector<LedgerBlock> blocks_;
};

struct InclusionStatus {
    bool committed = false;
    bool opened = false;
    std::optional<std::uint64_t> commit_height;
    std::optional<std::uint64_t> open_height;
};

InclusionStatus verify_inclusion(PartyId voter, const Blockchain& chain);

enum class RejectReason {
    NotEligible,
    AuthFailure,
    DuplicateBallot,
    DuplicateOpening,
    PhaseViolation,
    MalformedPayload,
    NoCommitment,
    CheatDetected,
    NotDelivered,
    NoQuorum,
    ConflictingVersions,
};

const char* reject_reason_name(RejectReason reason);

struct CheatEvent {
    PartyId party;
    std::string kind;
    std::string detail;
};

// A miner's local consistency check for a received update: authentication,
// eligibility, no duplicate ballot, phase rules derived from the local chain
// (openings only once all n commitments are on-chain), and opening-versus-
// commitment consistency. Always yields an opinion.
struct LocalCheck {
    MinerOpinion opinion;
    std::optional<RejectReason> reason;
    std::optional<CheatEvent> cheat;
};

LocalCheck local_consistency_check(PartyId miner, PartyId sender, const UpdateRecord& received,
                                   const Blockchain& local_chain, const AuthKeyTable& keys,
                                   const Roster& roster, const CommitmentParams& cparams);

struct SubmitResult {
    bool accepted = false;
    std::optional<RejectReason> reason;
    ConsensusDecision decision;
    std::uint64_t block_height = 0; // valid when accepted and not batched
    std::vector<CheatEvent> cheats;
};

// The replicated database: one chain copy per node, updated in lockstep by
// consensus rounds. Batching mode collects admitted records and appends them
// as a single block on flush.
class LedgerSystem {
  public:
    LedgerSystem(Roster roster, AuthKeyTable keys, CommitmentParams cparams,
                 bool batch_blocks = false);

    // Honest broadcast of one update to all miners.
    SubmitResult submit_update(PartyId sender, RecordKind kind, const Bytes& payload);

    // Wire-level entry: the copy each miner actually received (nullopt when
    // delivery failed). Runs one consensus round.
    SubmitResult process_delivery(PartyId sender,
                                  const std::vector<std::optional<UpdateRecord>>& per_miner);

    // Appends pending admitted records as one block (batching mode only).
    void flush_batch();

    const Blockchain& chain_of(PartyId node) const; // any party may read
    const Blockchain& observer_chain() const { return chain_of(PartyId::observer()); }

    InclusionStatus inclusion(PartyId voter) const {
        return verify_inclusion(voter, observer_chain());
    }

    const Roster& roster() const { return roster_; }
    const AuthKeyTable& keys() const { return keys_; }
    const CommitmentParams& commitment_params() const { return cparams_; }
    std::uint32_t rounds_run() const { return rounds_; }
    const std::vector<CheatEvent>& cheat_log() const { return cheat_log_; }

    // Phase-2 marker derived from the observer chain.
    bool all_commitments_on_chain() const {
        return observer_chain().count(RecordKind::BallotCommitment) >= roster_.n_voters;
    }

  private:
    void append_everywhere(LedgerBlock block);

    Roster roster_;
    AuthKeyTable keys_;
    CommitmentParams cparams_;
    bool batch_blocks_;
    std::map<PartyId, Blockchain> chains_;
    std::vector<UpdateRecord> pending_;
    std::vector<ConsensusDecision> pending_decisions_;
    std::vector<CheatEvent> cheat_log_;
    std::uint32_t rounds_ = 0;
};

} // namespace qvote

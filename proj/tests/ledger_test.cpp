#include "qvote/ledger.hpp"

#include "qvote/error.hpp"

#include <doctest.h>

#include <optional>
#include <string>
#include <vector>

using namespace qvote;

namespace {

struct Fixture {
    Roster roster;
    AuthKeyTable keys;
    CommitmentParams cparams;
    Rng rng;

    explicit Fixture(std::uint32_t n = 3, std::uint32_t m = 3, std::uint64_t seed = 17)
        : roster{n, m}, keys(), cparams(CommitmentParams::ideal(Modulus(n))), rng(seed) {
        Rng key_rng = rng.fork(1);
        keys = AuthKeyTable::generate(roster, key_rng);
    }

    LedgerSystem system(bool batch = false) { return LedgerSystem(roster, keys, cparams, batch); }

    // Produces the commit/open payload pair for a voter.
    std::pair<Bytes, Bytes> ballot_payloads(std::uint32_t voter, std::uint64_t value) {
        auto [c, o] = commit(PartyId::voter(voter), value, cparams, rng);
        return {serialize_evidence(c), serialize_opening(o)};
    }
};

} // namespace

TEST_CASE("pairwise keys exist for voter-miner and miner-miner pairs") {
    Fixture f;
    for (PartyId v : f.roster.voters())
        for (PartyId m : f.roster.miners())
            CHECK(f.keys.has_pair(v, m));
    CHECK(f.keys.has_pair(PartyId::miner(1), PartyId::miner(2)));
    CHECK_FALSE(f.keys.has_pair(PartyId::voter(1), PartyId::voter(99)));
    CHECK_THROWS_AS(f.keys.pair_key(PartyId::voter(1), PartyId::observer()), Error);

    // Tags are directional and fail closed on unknown pairs.
    Bytes content{1, 2, 3};
    Digest t = f.keys.tag(PartyId::voter(1), PartyId::miner(1), content);
    CHECK(f.keys.verify_tag(PartyId::voter(1), PartyId::miner(1), content, t));
    CHECK_FALSE(f.keys.verify_tag(PartyId::voter(2), PartyId::miner(1), content, t));
    CHECK_FALSE(f.keys.verify_tag(PartyId::voter(99), PartyId::miner(1), content, t));
}

TEST_CASE("first commitment accepted, duplicate rejected") {
    Fixture f;
    auto sys = f.system();
    auto [evidence, opening] = f.ballot_payloads(1, 2);

    auto r1 = sys.submit_update(PartyId::voter(1), RecordKind::BallotCommitment, evidence);
    CHECK(r1.accepted);
    CHECK(sys.observer_chain().count(RecordKind::BallotCommitment) == 1);

    // Same voter, different masked value: still a duplicate ballot.
    auto [evidence2, opening2] = f.ballot_payloads(1, 3);
    auto r2 = sys.submit_update(PartyId::voter(1), RecordKind::BallotCommitment, evidence2);
    CHECK_FALSE(r2.accepted);
    CHECK(r2.reason == RejectReason::DuplicateBallot);
    CHECK(sys.observer_chain().count(RecordKind::BallotCommitment) == 1);
}

TEST_CASE("off-roster submissions are not eligible") {
    Fixture f;
    auto sys = f.system();
    auto [evidence, opening] = f.ballot_payloads(1, 2);

    // Valid-format record from a party outside the roster.
    auto r = sys.submit_update(PartyId::voter(9), RecordKind::BallotCommitment, evidence);
    CHECK_FALSE(r.accepted);
    CHECK(r.reason == RejectReason::NotEligible);
    CHECK(sys.observer_chain().count(RecordKind::BallotCommitment) == 0);
}

TEST_CASE("full two-phase flow with three voters") {
    Fixture f;
    auto sys = f.system();
    std::vector<Bytes> openings;
    for (std::uint32_t v = 1; v <= 3; ++v) {
        auto [evidence, opening] = f.ballot_payloads(v, v - 1);
        openings.push_back(opening);
        CHECK(sys.submit_update(PartyId::voter(v), RecordKind::BallotCommitment, evidence).accepted);
    }
    CHECK(sys.all_commitments_on_chain());
    for (std::uint32_t v = 1; v <= 3; ++v)
        CHECK(sys.submit_update(PartyId::voter(v), RecordKind::BallotOpening, openings[v - 1])
                  .accepted);

    const Blockchain& chain = sys.observer_chain();
    CHECK(chain.blocks().size() == 7); // genesis + 3 + 3
    CHECK(chain.count(RecordKind::BallotCommitment) == 3);
    CHECK(chain.count(RecordKind::BallotOpening) == 3);
    CHECK(chain.verify());

    // Commitments precede openings in chain order.
    bool seen_opening = false;
    for (const LedgerBlock& b : chain.blocks()) {
        for (const UpdateRecord& r : b.records) {
            if (r.kind == RecordKind::BallotOpening)
                seen_opening = true;
            else if (seen_opening)
                FAIL("commitment after opening");
        }
    }

    auto status = sys.inclusion(PartyId::voter(2));
    CHECK(status.committed);
    CHECK(status.opened);
    CHECK(status.commit_height.has_value());
    CHECK(status.open_height.has_value());
}

TEST_CASE("openings gated on all commitments being on-chain") {
    Fixture f;
    auto sys = f.system();
    auto [evidence, opening] = f.ballot_payloads(1, 1);
    CHECK(sys.submit_update(PartyId::voter(1), RecordKind::BallotCommitment, evidence).accepted);

    // Phase 1 still open: two commitments missing.
    auto r = sys.submit_update(PartyId::voter(1), RecordKind::BallotOpening, opening);
    CHECK_FALSE(r.accepted);
    CHECK(r.reason == RejectReason::PhaseViolation);
}

TEST_CASE("opening that fails against the commitment records a cheat") {
    Fixture f;
    auto sys = f.system();
    std::vector<Bytes> openings;
    std::vector<Commitment> commitments;
    for (std::uint32_t v = 1; v <= 3; ++v) {
        auto [c, o] = commit(PartyId::voter(v), v % 2, f.cparams, f.rng);
        commitments.push_back(c);
        openings.push_back(serialize_opening(o));
        CHECK(sys.submit_update(PartyId::voter(v), RecordKind::BallotCommitment,
                                serialize_evidence(c))
                  .accepted);
    }

    // V1 tries to open a different value.
    Opening honest = deserialize_opening(openings[0]);
    Rng adv(5);
    auto forged = adversarial_rebind(commitments[0], honest, 3, f.cparams, adv);
    auto r = sys.submit_update(PartyId::voter(1), RecordKind::BallotOpening,
                               serialize_opening(forged.opening));
    CHECK_FALSE(r.accepted);
    CHECK(r.reason == RejectReason::CheatDetected);
    REQUIRE(r.cheats.size() == 1);
    CHECK(r.cheats[0].party == PartyId::voter(1));
    CHECK(sys.cheat_log().size() == 1);

    // Inclusion now reads committed-but-not-opened.
    auto status = sys.inclusion(PartyId::voter(1));
    CHECK(status.committed);
    CHECK_FALSE(status.opened);

    // The honest opening still passes afterwards.
    auto r2 = sys.submit_update(PartyId::voter(1), RecordKind::BallotOpening, openings[0]);
    CHECK(r2.accepted);
    // And a second opening for the same voter is rejected.
    auto r3 = sys.submit_update(PartyId::voter(1), RecordKind::BallotOpening, openings[0]);
    CHECK_FALSE(r3.accepted);
    CHECK(r3.reason == RejectReason::DuplicateOpening);
}

TEST_CASE("tampered copies lose their miners but honest quorum carries") {
    Fixture f;
    auto sys = f.system();
    auto [evidence, opening] = f.ballot_payloads(1, 2);

    UpdateRecord content;
    content.kind = RecordKind::BallotCommitment;
    content.voter = PartyId::voter(1);
    content.payload = evidence;

    std::vector<std::optional<UpdateRecord>> per_miner;
    const Bytes body = record_content_bytes(content);
    for (PartyId m : f.roster.miners()) {
        UpdateRecord copy = content;
        copy.auth_tag = f.keys.tag(PartyId::voter(1), m, body);
        per_miner.emplace_back(std::move(copy));
    }
    // M2's copy is tampered in flight: payload bit flipped, tag now stale.
    per_miner[1]->payload[0] ^= 0x01;

    auto r = sys.process_delivery(PartyId::voter(1), per_miner);
    CHECK(r.accepted); // 2 of 3 intact copies
    CHECK(r.decision.votes_for == 2);

    // All copies tampered: authentication rejects everywhere.
    auto sys2 = f.system();
    for (auto& copy : per_miner)
        copy->payload[0] ^= 0x04;
    auto r2 = sys2.process_delivery(PartyId::voter(1), per_miner);
    CHECK_FALSE(r2.accepted);
}

TEST_CASE("chains replicate byte-identically and only grow") {
    Fixture f;
    auto sys = f.system();
    std::string prev_serialized = sys.observer_chain().to_jsonl();
    CHECK(sys.observer_chain().blocks().size() == 1); // genesis only

    std::vector<Bytes> openings;
    for (std::uint32_t v = 1; v <= 3; ++v) {
        auto [evidence, opening] = f.ballot_payloads(v, 0);
        openings.push_back(opening);
        sys.submit_update(PartyId::voter(v), RecordKind::BallotCommitment, evidence);
        // Append-only: the previous serialization is a strict prefix.
        std::string now = sys.observer_chain().to_jsonl();
        CHECK(now.compare(0, prev_serialized.size(), prev_serialized) == 0);
        CHECK(now.size() > prev_serialized.size());
        prev_serialized = now;
    }

    // Identical copies at every node, voter or miner or observer.
    for (PartyId node : f.roster.all_nodes())
        CHECK(sys.chain_of(node).to_jsonl() == prev_serialized);
}

TEST_CASE("single-bit mutation of a stored block breaks the verify pass") {
    Fixture f;
    auto sys = f.system();
    for (std::uint32_t v = 1; v <= 3; ++v) {
        auto [evidence, opening] = f.ballot_payloads(v, 1);
        sys.submit_update(PartyId::voter(v), RecordKind::BallotCommitment, evidence);
    }
    CHECK(sys.observer_chain().verify());

    Blockchain tampered = sys.observer_chain();
    auto& blocks = const_cast<std::vector<LedgerBlock>&>(tampered.blocks());
    blocks[2].records[0].payload[3] ^= 0x10;
    CHECK_FALSE(tampered.verify());
}

TEST_CASE("unknown voter has no inclusion") {
    Fixture f;
    auto sys = f.system();
    auto status = sys.inclusion(PartyId::voter(7));
    CHECK_FALSE(status.committed);
    CHECK_FALSE(status.opened);
}

TEST_CASE("batching collects one block per flush") {
    Fixture f;
    auto sys = f.system(true);
    for (std::uint32_t v = 1; v <= 3; ++v) {
        auto [evidence, opening] = f.ballot_payloads(v, 1);
        CHECK(sys.submit_update(PartyId::voter(v), RecordKind::BallotCommitment, evidence)
                  .accepted);
    }
    CHECK(sys.observer_chain().blocks().size() == 1); // nothing appended yet
    sys.flush_batch();
    const Blockchain& chain = sys.observer_chain();
    CHECK(chain.blocks().size() == 2);
    CHECK(chain.tip().records.size() == 3);
    CHECK(chain.verify());
    CHECK(sys.all_commitments_on_chain());
}

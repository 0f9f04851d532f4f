#include "qvote/netsim.hpp"

#include "qvote/error.hpp"
#include "qvote/trace.hpp"

#include <doctest.h>

#include <string>
#include <vector>

using namespace qvote;

namespace {

Bytes bytes_of(std::initializer_list<std::uint8_t> init) { return Bytes(init); }

} // namespace

TEST_CASE("quantum payload reaches the receiver, not the adversary log") {
    Simulation sim;
    std::vector<Delivery> seen;
    sim.register_party(PartyId::voter(1), [](const Delivery&) {});
    sim.register_party(PartyId::voter(2), [&](const Delivery& d) { seen.push_back(d); });

    const Bytes share = bytes_of({3});
    sim.at(0, [&] { sim.send(PartyId::voter(1), PartyId::voter(2), ChannelKind::QuantumSecure,
                             share); });
    CHECK(sim.run() == Simulation::RunStatus::Quiescent);

    REQUIRE(seen.size() == 1);
    CHECK(seen[0].payload == share);
    CHECK(seen[0].tick == 1); // unit latency
    CHECK_FALSE(seen[0].failed);

    REQUIRE(sim.observations().size() == 1);
    CHECK(sim.observations()[0].length == 1);
    CHECK(sim.observations()[0].classical_payload.empty());

    // The trace never carries quantum plaintext either.
    CHECK(sim.trace().text().find("\"payload\"") == std::string::npos);
}

TEST_CASE("classical traffic is observable in full") {
    Simulation sim;
    sim.register_party(PartyId::voter(1), [](const Delivery&) {});
    sim.register_party(PartyId::miner(1), [](const Delivery&) {});
    sim.at(0, [&] {
        sim.send(PartyId::voter(1), PartyId::miner(1), ChannelKind::ClassicalAuth,
                 bytes_of({0xde, 0xad}));
    });
    sim.run();
    REQUIRE(sim.observations().size() == 1);
    CHECK(sim.observations()[0].classical_payload == bytes_of({0xde, 0xad}));
}

TEST_CASE("self-send lands in the same tick") {
    Simulation sim;
    std::uint64_t delivered_at = 99;
    sim.register_party(PartyId::voter(1), [&](const Delivery& d) { delivered_at = d.tick; });
    sim.at(5, [&] {
        sim.send(PartyId::voter(1), PartyId::voter(1), ChannelKind::QuantumSecure, bytes_of({7}));
    });
    sim.run();
    CHECK(delivered_at == 5);
}

TEST_CASE("sending to an unregistered party is refused") {
    Simulation sim;
    sim.register_party(PartyId::voter(1), [](const Delivery&) {});
    bool threw = false;
    sim.at(0, [&] {
        try {
            sim.send(PartyId::voter(1), PartyId::voter(2), ChannelKind::QuantumSecure,
                     bytes_of({1}));
        } catch (const Error& e) {
            threw = e.code() == Errc::NoChannel;
        }
    });
    sim.run();
    CHECK(threw);
}

TEST_CASE("zero-event world quiesces immediately") {
    Simulation sim;
    CHECK(sim.run() == Simulation::RunStatus::Quiescent);
    CHECK(sim.now() == 0);
}

TEST_CASE("tick limit stops runaway schedules") {
    Simulation sim(10);
    std::function<void()> reschedule = [&] { sim.at(sim.now() + 1, reschedule); };
    sim.at(0, reschedule);
    CHECK(sim.run() == Simulation::RunStatus::TimedOut);
}

TEST_CASE("tampered messages surface as delivery failures") {
    Simulation sim;
    std::vector<Delivery> at_receiver;
    sim.register_party(PartyId::voter(1), [](const Delivery&) {});
    sim.register_party(PartyId::miner(1), [&](const Delivery& d) { at_receiver.push_back(d); });
    sim.set_tamper_rule([](const Delivery& d) { return d.channel == ChannelKind::ClassicalAuth; });

    sim.at(0, [&] {
        sim.send(PartyId::voter(1), PartyId::miner(1), ChannelKind::ClassicalAuth,
                 bytes_of({1, 2, 3}));
        sim.send(PartyId::voter(1), PartyId::miner(1), ChannelKind::QuantumSecure,
                 bytes_of({4, 5}));
    });
    sim.run();

    REQUIRE(at_receiver.size() == 2);
    CHECK(at_receiver[0].failed);                       // tampered classical copy
    CHECK_FALSE(at_receiver[1].failed);                 // quantum copy untouched
    CHECK(at_receiver[1].payload == bytes_of({4, 5}));
    CHECK(sim.trace().text().find("delivery_failure") != std::string::npos);
}

TEST_CASE("identical scripts give byte-identical traces") {
    auto script = [] {
        Simulation sim;
        sim.register_party(PartyId::voter(1), [](const Delivery&) {});
        sim.register_party(PartyId::voter(2), [&](const Delivery&) {});
        sim.at(0, [&] {
            sim.send(PartyId::voter(1), PartyId::voter(2), ChannelKind::QuantumSecure,
                     bytes_of({1}));
            sim.send(PartyId::voter(2), PartyId::voter(1), ChannelKind::ClassicalAuth,
                     bytes_of({2, 3}));
        });
        sim.run();
        return sim.trace().text();
    };
    CHECK(script() == script());
}

TEST_CASE("hash-chained trace lines detect single-character edits") {
    Simulation sim;
    sim.register_party(PartyId::voter(1), [](const Delivery&) {});
    sim.register_party(PartyId::voter(2), [&](const Delivery&) {});
    sim.at(0, [&] {
        sim.send(PartyId::voter(1), PartyId::voter(2), ChannelKind::ClassicalAuth,
                 bytes_of({9, 9}));
    });
    sim.run();

    const std::string good = sim.trace().text();
    CHECK(verify_trace_text(good).ok);

    // Flip one hex character inside the second line's digest.
    std::string bad = good;
    const std::size_t line2 = bad.find('\n') + 1;
    const std::size_t digest_pos = bad.find("\"digest\":\"", line2) + 10;
    bad[digest_pos] = bad[digest_pos] == '0' ? '1' : '0';
    auto r = verify_trace_text(bad);
    CHECK_FALSE(r.ok);
    CHECK(r.bad_line == 2);

    // Reorder the two lines: the chain breaks at the first line.
    const std::size_t split = good.find('\n') + 1;
    std::string reordered = good.substr(split) + good.substr(0, split);
    auto r2 = verify_trace_text(reordered);
    CHECK_FALSE(r2.ok);
    CHECK(r2.bad_line == 1);

    CHECK_FALSE(verify_trace_text("").ok);
}

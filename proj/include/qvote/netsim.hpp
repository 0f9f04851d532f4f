#pragma once

#include "qvote/hash.hpp"
#include "qvote/party.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

namespace qvote {

using ordered_json = nlohmann::ordered_json;

// JSON-lines trace with a per-line hash chain: every line carries
// chain = SHA256(prev_chain || line-without-chain-field), so any single-bit
// edit or reordering breaks verification at the first affected line.
class TraceWriter {
  public:
    explicit TraceWriter(bool enabled = true) : enabled_(enabled) {}

    void event(ordered_json line);

    bool enabled() const { return enabled_; }
    const std::string& text() const { return text_; }

  private:
    bool enabled_;
    std::string text_;
    Digest chain_ = zero_digest();
};

enum class ChannelKind : std::uint8_t { QuantumSecure, ClassicalAuth };

const char* channel_name(ChannelKind kind);

struct Delivery {
    std::uint64_t tick = 0;
    PartyId sender;
    PartyId receiver;
    ChannelKind channel = ChannelKind::ClassicalAuth;
    Bytes payload;
    bool failed = false; // integrity check failed in flight
};

// What a global observer adversary gets to see. Quantum-secure traffic leaks
// metadata only; classical traffic is readable in full.
struct Observation {
    std::uint64_t tick = 0;
    PartyId sender;
    PartyId receiver;
    ChannelKind channel = ChannelKind::ClassicalAuth;
    std::size_t length = 0;
    Bytes classical_payload; // empty for QuantumSecure
};

// Deterministic discrete-event scheduler: unit-latency, loss-free,
// order-preserving channels between registered parties. Events execute in
// (tick, insertion) order; a run is a pure function of its inputs.
class Simulation {
  public:
    using Handler = std::function<void(const Delivery&)>;
    using Action = std::function<void()>;
    // Return true to corrupt the message in flight.
    using TamperRule = std::function<bool(const Delivery&)>;

    explicit Simulation(std::uint64_t tick_limit = 100000, bool collect_trace = true)
        : tick_limit_(tick_limit), trace_(collect_trace) {}

    void register_party(PartyId id, Handler handler);
    bool has_party(PartyId id) const { return handlers_.count(id) != 0; }

    // Unit latency; a self-send lands later in the same tick.
    void send(PartyId from, PartyId to, ChannelKind channel, Bytes payload);

    void at(std::uint64_t tick, Action action);

    enum class RunStatus { Quiescent, TimedOut };
    RunStatus run();

    std::uint64_t now() const { return now_; }
    TraceWriter& trace() { return trace_; }

    void set_tamper_rule(TamperRule rule) { tamper_ = std::move(rule); }
    const std::vector<Observation>& observations() const { return observations_; }

  private:
    struct Item {
        std::uint64_t tick;
        std::uint64_t seq;
        bool is_message;
        Delivery message;
        Action action;
    };
    struct Later {
        bool operator()(const Item& a, const Item& b) const {
            return a.tick != b.tick ? a.tick > b.tick : a.seq > b.seq;
        }
    };

    void deliver(Item& item);

    std::uint64_t tick_limit_;
    TraceWriter trace_;
    std::uint64_t now_ = 0;
    std::uint64_t seq_ = 0;
    std::map<PartyId, Handler> handlers_;
    std::priority_queue<Item, std::vector<Item>, Later> queue_;
    TamperRule tamper_;
    std::vector<Observation> observations_;
};

} // namespace qvote

#include "qvote/netsim.hpp"

#include "qvote/bytes.hpp"
#include "qvote/error.hpp"

namespace qvote {

void TraceWriter::event(ordered_json line) {
    if (!enabled_)
        return;
    const std::string core = line.dump();
    ByteWriter w;
    w.raw(chain_);
    w.str(core);
    chain_ = sha256(w.data());
    line["chain"] = to_hex(chain_);
    text_ += line.dump();
    text_ += '\n';
}

const char* channel_name(ChannelKind kind) {
    return kind == ChannelKind::QuantumSecure ? "quantum" : "classical";
}

void Simulation::register_party(PartyId id, Handler handler) {
    handlers_[id] = std::move(handler);
}

void Simulation::send(PartyId from, PartyId to, ChannelKind channel, Bytes payload) {
    if (!has_party(from) || !has_party(to))
        throw Error(Errc::NoChannel, from.label() + " -> " + to.label());

    Item item;
    item.tick = from == to ? now_ : now_ + 1; // diagonal shares stay local
    item.seq = ++seq_;
    item.is_message = true;
    item.message =
        Delivery{item.tick, from, to, channel, std::move(payload), false};

    trace_.event({{"tick", now_},
                  {"type", "send"},
                  {"sender", from.label()},
                  {"receiver", to.label()},
                  {"channel", channel_name(channel)},
                  {"digest", to_hex(sha256(item.message.payload))},
                  {"detail", ordered_json{{"length", item.message.payload.size()}}}});

    queue_.push(std::move(item));
}

void Simulation::at(std::uint64_t tick, Action action) {
    Item item;
    item.tick = tick;
    item.seq = ++seq_;
    item.is_message = false;
    item.action = std::move(action);
    queue_.push(std::move(item));
}

Simulation::RunStatus Simulation::run() {
    while (!queue_.empty()) {
        Item item = queue_.top();
        queue_.pop();
        if (item.tick > tick_limit_)
            return RunStatus::TimedOut;
        now_ = item.tick;
        if (item.is_message)
            deliver(item);
        else
            item.action();
    }
    return RunStatus::Quiescent;
}

void Simulation::deliver(Item& item) {
    Delivery& msg = item.message;

    // The global observer sees metadata on the quantum channel and full
    // plaintext on the classical channel.
    Observation obs;
    obs.tick = msg.tick;
    obs.sender = msg.sender;
    obs.receiver = msg.receiver;
    obs.channel = msg.channel;
    obs.length = msg.payload.size();
    if (msg.channel == ChannelKind::ClassicalAuth)
        obs.classical_payload = msg.payload;
    observations_.push_back(std::move(obs));

    if (tamper_ && tamper_(msg)) {
        // Integrity contract: a corrupted message is never delivered as
        // valid; the receiver sees a failure instead.
        if (!msg.payload.empty())
            msg.payload[0] ^= 0x01;
        msg.failed = true;
        trace_.event({{"tick", msg.tick},
                      {"type", "delivery_failure"},
                      {"sender", msg.sender.label()},
                      {"receiver", msg.receiver.label()},
                      {"channel", channel_name(msg.channel)},
                      {"digest", to_hex(sha256(msg.payload))},
                      {"detail", ordered_json{{"length", msg.payload.size()}}}});
        handlers_.at(msg.receiver)(msg);
        return;
    }

    ordered_json detail;
    if (msg.channel == ChannelKind::ClassicalAuth)
        detail = ordered_json{{"payload", to_hex(msg.payload)}};
    else
        detail = ordered_json{{"length", msg.payload.size()}};
    trace_.event({{"tick", msg.tick},
                  {"type", "deliver"},
                  {"sender", msg.sender.label()},
                  {"receiver", msg.receiver.label()},
                  {"channel", channel_name(msg.channel)},
                  {"digest", to_hex(sha256(msg.payload))},
                  {"detail", std::move(detail)}});
    handlers_.at(msg.receiver)(msg);
}

} // namespace qvote

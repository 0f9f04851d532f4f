#include "qvote/trace.hpp"

#include "qvote/bytes.hpp"
#include "qvote/error.hpp"
#include "qvote/ledger.hpp"
#include "qvote/netsim.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string_view>

namespace qvote {

namespace {

struct Replay {
    Digest chain = zero_digest();
    std::uint64_t last_tick = 0;
    bool first_event = true;

    // Ledger state reconstructed from block events.
    bool have_block = false;
    std::uint64_t last_height = 0;
    Digest last_block_digest{};
    std::uint32_t commitments = 0;
    std::map<std::string, std::uint64_t> opened_values; // voter label -> value

    std::optional<std::string> step(const ordered_json& line, std::string raw);
};

std::optional<std::string> Replay::step(const ordered_json& line, std::string /*raw*/) {
    // Hash chain over the line body.
    if (!line.contains("chain") || !line.at("chain").is_string())
        return "missing chain field";
    const std::string claimed = line.at("chain").get<std::string>();
    ordered_json core = line;
    core.erase("chain");
    ByteWriter w;
    w.raw(chain);
    w.str(core.dump());
    chain = sha256(w.data());
    if (to_hex(chain) != claimed)
        return "hash chain mismatch";

    for (const char* field : {"tick", "type"})
        if (!line.contains(field))
            return std::string("missing field: ") + field;

    const std::uint64_t tick = line.at("tick").get<std::uint64_t>();
    if (!first_event && tick < last_tick)
        return "ticks must not decrease";
    first_event = false;
    last_tick = tick;

    const std::string type = line.at("type").get<std::string>();

    if (type == "block") {
        const LedgerBlock block = block_from_json(line.at("detail"));
        const Digest recomputed = block_digest(block);
        if (to_hex(recomputed) != line.at("detail").at("digest").get<std::string>())
            return "block digest mismatch";
        if (!have_block) {
            if (block.height != 0 || block.prev_digest != zero_digest())
                return "bad genesis block";
        } else {
            if (block.height != last_height + 1)
                return "non-consecutive block height";
            if (block.prev_digest != last_block_digest)
                return "prev_digest does not chain";
        }
        have_block = true;
        last_height = block.height;
        last_block_digest = recomputed;
        for (const UpdateRecord& r : block.records) {
            if (r.kind == RecordKind::BallotCommitment) {
                ++commitments;
            } else {
                const Opening opening = deserialize_opening(r.payload);
                if (!opened_values.emplace(r.voter.label(), opening.value).second)
                    return "duplicate opening for " + r.voter.label();
            }
        }
        return std::nullopt;
    }

    if (type == "deliver" && line.at("channel").get<std::string>() == "classical") {
        const Bytes payload = from_hex(line.at("detail").at("payload").get<std::string>());
        if (to_hex(sha256(payload)) != line.at("digest").get<std::string>())
            return "payload digest mismatch";
        return std::nullopt;
    }

    if (type == "result") {
        const auto& detail = line.at("detail");
        if (detail.at("tally").is_null())
            return std::nullopt; // aborted run: nothing to recompute
        if (opened_values.size() != commitments || commitments == 0)
            return "tally reported over an incomplete ballot set";
        std::uint64_t sum = 0;
        for (const auto& [voter, value] : opened_values)
            sum = (sum + value) % (commitments + 1);
        if (sum != detail.at("tally").get<std::uint64_t>())
            return "tally does not match the opened ballots";
        return std::nullopt;
    }

    return std::nullopt;
}

} // namespace

TraceVerifyResult verify_trace_text(const std::string& text) {
    TraceVerifyResult result;
    Replay replay;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool saw_line = false;

    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos)
            end = text.size();
        const std::string raw = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        saw_line = true;

        ordered_json line;
        try {
            line = ordered_json::parse(raw);
            if (auto problem = replay.step(line, raw)) {
                result.bad_line = line_no;
                result.message = *problem;
                return result;
            }
        } catch (const ordered_json::exception& e) {
            result.bad_line = line_no;
            result.message = std::string("unparseable line: ") + e.what();
            return result;
        } catch (const Error& e) {
            result.bad_line = line_no;
            result.message = e.what();
            return result;
        }
    }

    if (!saw_line) {
        result.bad_line = 1;
        result.message = "empty trace";
        return result;
    }
    result.ok = true;
    return result;
}

} // namespace qvote

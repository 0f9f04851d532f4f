#pragma once

#include <cstddef>
#include <string>

namespace qvote {

struct TraceVerifyResult {
    bool ok = false;
    std::size_t bad_line = 0; // 1-based; 0 when ok
    std::string message;
};

// Replays a JSON-lines trace: re-derives the per-line hash chain, recomputes
// every block and classical-payload digest, checks block heights and
// prev_digest continuity, and recomputes the tally from the opening records.
// Any mismatch reports the first offending line.
TraceVerifyResult verify_trace_text(const std::string& text);

} // namespace qvote

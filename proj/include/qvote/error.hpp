#pragma once

#include <stdexcept>
#include <string>

namespace qvote {

enum class Errc {
    InvalidVoterCount,
    MalformedColumn,
    IncompleteBallotSet,
    ValueOutOfRange,
    AlreadyOpened,
    NoMiners,
    NoChannel,
    NotEligible,
    IncompleteChain,
    RefuseExhaustiveAudit,
    InvalidConfig,
    BadTrace,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

  private:
    Errc code_;
};

} // namespace qvote

#include "qvote/error.hpp"

namespace qvote {

const char* errc_name(Errc code) {
    switch (code) {
    case Errc::InvalidVoterCount: return "InvalidVoterCount";
    case Errc::MalformedColumn: return "MalformedColumn";
    case Errc::IncompleteBallotSet: return "IncompleteBallotSet";
    case Errc::ValueOutOfRange: return "ValueOutOfRange";
    case Errc::AlreadyOpened: return "AlreadyOpened";
    case Errc::NoMiners: return "NoMiners";
    case Errc::NoChannel: return "NoChannel";
    case Errc::NotEligible: return "NotEligible";
    case Errc::IncompleteChain: return "IncompleteChain";
    case Errc::RefuseExhaustiveAudit: return "RefuseExhaustiveAudit";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::BadTrace: return "BadTrace";
    }
    return "UnknownError";
}

} // namespace qvote

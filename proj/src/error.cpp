#include "lswn/error.hpp"

namespace lswn {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::MalformedRecord: return "MalformedRecord";
        case ErrorCode::InconsistentShape: return "InconsistentShape";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::DegenerateWindow: return "DegenerateWindow";
        case ErrorCode::EmptyGrid: return "EmptyGrid";
        case ErrorCode::AllCandidatesDegenerate: return "AllCandidatesDegenerate";
        case ErrorCode::AllCandidatesInfeasible: return "AllCandidatesInfeasible";
        case ErrorCode::ConfigInfeasible: return "ConfigInfeasible";
        case ErrorCode::WindowTooLarge: return "WindowTooLarge";
        case ErrorCode::GridTooSmall: return "GridTooSmall";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace lswn

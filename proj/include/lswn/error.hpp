#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lswn {

enum class ErrorCode {
    InvalidArgument,
    MalformedRecord,
    InconsistentShape,
    NonFiniteValue,
    DegenerateWindow,
    EmptyGrid,
    AllCandidatesDegenerate,
    AllCandidatesInfeasible,
    ConfigInfeasible,
    WindowTooLarge,
    GridTooSmall,
    Io,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception. Every failure raised by lswn carries a code so
/// callers (CLI, Python) can map it without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace lswn

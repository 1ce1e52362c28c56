#ifndef DDEDTM_ERROR_HPP
#define DDEDTM_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace ddedtm
{

enum class ErrorCode {
    CenterMismatch,
    OrderTooLow,
    DivisionBySmallLeadingCoefficient,
    SyntaxError,
    UnknownDelayIndex,
    DerivativeOrderTooHigh,
    HistoryContainsState,
    NonIntegerExponent,
    InvalidModel,
    InconsistentInitialValues,
    ImplicitRecurrence,
    UnsupportedCurrentStateDenominator,
    UnsupportedCurrentStateInExp,
    TooManySegments,
    OutOfDomain,
    NonFiniteCoefficient,
    NonFiniteState,
    StepTooLarge,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above. Line and
// column are 1-based and only meaningful for SyntaxError; segment is the 1-based
// solution segment for solver failures (0 when not applicable).
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string &message);
    Error(ErrorCode code, const std::string &message, int line, int column);

    ErrorCode code() const noexcept { return code_; }
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }
    int segment() const noexcept { return segment_; }

    // Copy of this error attributed to a solution segment.
    Error in_segment(int segment) const;

private:
    ErrorCode code_;
    int line_ = 0;
    int column_ = 0;
    int segment_ = 0;
};

} // namespace ddedtm

#endif

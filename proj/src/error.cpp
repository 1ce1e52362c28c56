#include <ddedtm/error.hpp>

namespace ddedtm
{

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
        case ErrorCode::CenterMismatch:
            return "CenterMismatch";
        case ErrorCode::OrderTooLow:
            return "OrderTooLow";
        case ErrorCode::DivisionBySmallLeadingCoefficient:
            return "DivisionBySmallLeadingCoefficient";
        case ErrorCode::SyntaxError:
            return "SyntaxError";
        case ErrorCode::UnknownDelayIndex:
            return "UnknownDelayIndex";
        case ErrorCode::DerivativeOrderTooHigh:
            return "DerivativeOrderTooHigh";
        case ErrorCode::HistoryContainsState:
            return "HistoryContainsState";
        case ErrorCode::NonIntegerExponent:
            return "NonIntegerExponent";
        case ErrorCode::InvalidModel:
            return "InvalidModel";
        case ErrorCode::InconsistentInitialValues:
            return "InconsistentInitialValues";
        case ErrorCode::ImplicitRecurrence:
            return "ImplicitRecurrence";
        case ErrorCode::UnsupportedCurrentStateDenominator:
            return "UnsupportedCurrentStateDenominator";
        case ErrorCode::UnsupportedCurrentStateInExp:
            return "UnsupportedCurrentStateInExp";
        case ErrorCode::TooManySegments:
            return "TooManySegments";
        case ErrorCode::OutOfDomain:
            return "OutOfDomain";
        case ErrorCode::NonFiniteCoefficient:
            return "NonFiniteCoefficient";
        case ErrorCode::NonFiniteState:
            return "NonFiniteState";
        case ErrorCode::StepTooLarge:
            return "StepTooLarge";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
{
}

Error::Error(ErrorCode code, const std::string &message, int line, int column)
    : std::runtime_error(std::string(to_string(code)) + " at line " + std::to_string(line) + ", column "
                         + std::to_string(column) + ": " + message),
      code_(code), line_(line), column_(column)
{
}

Error Error::in_segment(int segment) const
{
    std::string text = what();
    const auto prefix = std::string(to_string(code_)) + ": ";
    if (text.rfind(prefix, 0) == 0) {
        text.erase(0, prefix.size());
    }
    Error e(code_, "segment " + std::to_string(segment) + ": " + text);
    e.line_ = line_;
    e.column_ = column_;
    e.segment_ = segment;
    return e;
}

} // namespace ddedtm

#ifndef DDEDTM_CLI_HPP
#define DDEDTM_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include <ddedtm/solver.hpp>

namespace ddedtm::cli
{

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInputError = 1;
inline constexpr int kSolverError = 2;
inline constexpr int kToleranceExceeded = 3;

// Entry point of the dde_dtm tool; args[0] is the program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

// Shortest text with 17 significant digits, '.' decimal separator.
std::string format_number(double v);

// Machine-readable per-segment coefficient listing.
nlohmann::json coefficient_dump(const PiecewiseSolution &sol);

} // namespace ddedtm::cli

#endif

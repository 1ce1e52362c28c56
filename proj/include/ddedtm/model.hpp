#ifndef DDEDTM_MODEL_HPP
#define DDEDTM_MODEL_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <ddedtm/expr.hpp>
#include <ddedtm/rational.hpp>

namespace ddedtm
{

// A constant delay. Delays written as fractions or integers keep their exact
// value, which selects the commensurate segment grid.
struct Delay {
    double value = 0.0;
    std::optional<Rational> exact;

    static Delay from_double(double v) { return {v, std::nullopt}; }
    static Delay from_rational(const Rational &r) { return {r.to_double(), r}; }
};

inline constexpr int kDefaultTruncationOrder = 16;

// Truncation order per segment. The last entry repeats for segments past the
// end of the list, so a single entry means a uniform order.
struct TruncationOrders {
    std::vector<int> per_segment{kDefaultTruncationOrder};

    static TruncationOrders uniform(int n) { return {{n}}; }
    int at(int segment) const;
};

// u^(n)(t) = rhs(t, u(t), ..., u^(n-1)(t), u^(p)(t - tau_i) ...) on (t0, T] with
// u = history on [t0 - max tau, t0].
struct DelayModel {
    int order = 1;
    std::vector<Delay> delays;
    ExprPtr rhs;
    ExprPtr history;
    double t0 = 0.0;
    double T = 1.0;
    TruncationOrders truncation;
    std::optional<std::vector<double>> initial_values;

    double max_delay() const noexcept;
    bool all_delays_exact() const noexcept;
};

// Parses an expression of the model DSL:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ('^' uint)?
//   atom   := number | 't' | stateref | '(' expr ')' | 'exp(' expr ')' | '-' atom
//   stateref := 'u' '\''* ('[' uint ']')?
ExprPtr parse_expr(std::string_view text);

// Checks the structural invariants (horizon, delays, derivative orders, delay
// indices, state-free history, initial-value consistency). Throws Error.
void check_model(const DelayModel &m);

// Parses the "key = value" model file format and runs check_model.
DelayModel parse_model(std::string_view text);

enum class ModelClass { Ode, Delayed, Neutral };
std::string_view to_string(ModelClass c) noexcept;

enum class Severity { Warning, Blocking };

struct Diagnostic {
    std::string code;
    Severity severity = Severity::Blocking;
    std::string message;
};

struct ModelReport {
    ModelClass model_class = ModelClass::Ode;
    std::vector<Diagnostic> diagnostics;

    bool blocked() const noexcept;
};

ModelClass classify(const DelayModel &m);

// Classifies the model and reports constructs the recurrence compiler cannot
// handle. Never throws for a structurally valid model.
ModelReport validate_model(const DelayModel &m);

} // namespace ddedtm

#endif

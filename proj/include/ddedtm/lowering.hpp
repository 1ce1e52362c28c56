#ifndef DDEDTM_LOWERING_HPP
#define DDEDTM_LOWERING_HPP

#include <compare>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include <ddedtm/expr.hpp>
#include <ddedtm/model.hpp>
#include <ddedtm/series.hpp>

namespace ddedtm
{

// A delayed term u^(deriv)(t - tau_delay) of the right-hand side.
struct SlotKey {
    int deriv = 0;
    int delay = 1;

    friend auto operator<=>(const SlotKey &, const SlotKey &) = default;
};

using KnownSlots = std::map<SlotKey, TruncatedSeries>;

enum class OpCode {
    Constant, // value
    Time,     // [center, 1]
    Unknown,  // (k+deriv)!/k! * U(k+deriv)
    Known,    // coefficient k of a bound slot series
    Add,
    Sub,
    Neg,
    Mul, // Cauchy product
    Div, // forward division recurrence
    Exp, // exp recurrence
};

struct Instruction {
    OpCode op = OpCode::Constant;
    int lhs = -1;
    int rhs = -1;
    double value = 0.0;
    int deriv = 0;
    int slot = -1;
};

// Straight-line program producing the transform F(k) of the right-hand side one
// order at a time. Operands always precede their users, so evaluating the
// instructions in sequence for order k only needs orders <= k of every operand.
class RecurrencePlan
{
public:
    int equation_order() const noexcept { return order_; }
    const std::vector<Instruction> &instructions() const noexcept { return code_; }
    const std::vector<SlotKey> &slots() const noexcept { return slots_; }
    int root() const noexcept { return root_; }

private:
    friend RecurrencePlan compile_rhs(const DelayModel &m);
    friend RecurrencePlan compile_expr(const Expr &rhs, int equation_order);

    int order_ = 1;
    std::vector<Instruction> code_;
    std::vector<SlotKey> slots_;
    int root_ = -1;
};

// Lowers the right-hand side; throws ImplicitRecurrence,
// UnsupportedCurrentStateDenominator or UnsupportedCurrentStateInExp.
RecurrencePlan compile_rhs(const DelayModel &m);
RecurrencePlan compile_expr(const Expr &rhs, int equation_order);

// Highest unknown coefficient index read while producing U(k+n), indexed by k.
struct PlanTrace {
    std::vector<int> max_unknown_read;
};

// Runs U(k+n) = k!/(k+n)! F(k) for k = 0..order-n from the n initial
// coefficients. The result is expanded about center.
TruncatedSeries run_plan(const RecurrencePlan &plan, const KnownSlots &known, std::span<const double> init, int order,
                         double center, PlanTrace *trace = nullptr);

// F(0..count-1) with the unknown stream taken from a complete series.
std::vector<double> rhs_transform(const RecurrencePlan &plan, const KnownSlots &known, const TruncatedSeries &unknown,
                                  int count);

// (k+n)!/k! U(k+n) - F(k) for k = 0..order(u)-n.
std::vector<double> plan_residual(const RecurrencePlan &plan, const KnownSlots &known, const TruncatedSeries &u);

// Direct expansion of an expression about center using whole-series arithmetic.
// State nodes are resolved through the callback; without one they are an error.
using SeriesLookup = std::function<TruncatedSeries(int deriv, int delay)>;
TruncatedSeries expand_series(const Expr &e, double center, int order, const SeriesLookup &states = {});

} // namespace ddedtm

#endif

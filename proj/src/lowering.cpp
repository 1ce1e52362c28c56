#include <ddedtm/lowering.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <ddedtm/error.hpp>

namespace ddedtm
{

namespace
{

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline constexpr double kBlowUpMagnitude = 1e100;

class Compiler
{
public:
    Compiler(int order, std::vector<Instruction> &code, std::vector<SlotKey> &slots)
        : order_(order), code_(code), slots_(slots)
    {
    }

    int lower(const Expr &e)
    {
        using namespace node;
        return std::visit(
            overloaded{
                [&](const Const &x) { return emit({.op = OpCode::Constant, .value = x.value}); },
                [&](const Time &) { return emit({.op = OpCode::Time}); },
                [&](const State &x) {
                    if (x.delay == 0) {
                        if (x.deriv >= order_) {
                            throw Error(ErrorCode::ImplicitRecurrence,
                                        "u with " + std::to_string(x.deriv)
                                            + " primes at the current time makes the recurrence implicit");
                        }
                        return emit({.op = OpCode::Unknown, .deriv = x.deriv});
                    }
                    return emit({.op = OpCode::Known, .slot = slot_index({x.deriv, x.delay})});
                },
                [&](const Add &x) { return fold(x.terms, OpCode::Add); },
                [&](const Sub &x) {
                    const int a = lower(*x.lhs);
                    const int b = lower(*x.rhs);
                    return emit({.op = OpCode::Sub, .lhs = a, .rhs = b});
                },
                [&](const Mul &x) { return fold(x.factors, OpCode::Mul); },
                [&](const Div &x) {
                    if (contains_current_state(*x.den)) {
                        throw Error(ErrorCode::UnsupportedCurrentStateDenominator,
                                    "denominator '" + print_expr(*x.den) + "' depends on the current-time unknown");
                    }
                    const int a = lower(*x.num);
                    const int b = lower(*x.den);
                    return emit({.op = OpCode::Div, .lhs = a, .rhs = b});
                },
                [&](const Pow &x) {
                    if (x.exponent == 0) {
                        return emit({.op = OpCode::Constant, .value = 1.0});
                    }
                    const int base = lower(*x.base);
                    int acc = base;
                    for (unsigned i = 1; i < x.exponent; ++i) {
                        acc = emit({.op = OpCode::Mul, .lhs = acc, .rhs = base});
                    }
                    return acc;
                },
                [&](const Exp &x) {
                    if (contains_current_state(*x.arg)) {
                        throw Error(ErrorCode::UnsupportedCurrentStateInExp,
                                    "exp argument '" + print_expr(*x.arg) + "' depends on the current-time unknown");
                    }
                    const int a = lower(*x.arg);
                    return emit({.op = OpCode::Exp, .lhs = a});
                },
                [&](const Neg &x) {
                    const int a = lower(*x.arg);
                    return emit({.op = OpCode::Neg, .lhs = a});
                },
            },
            e.node);
    }

private:
    int emit(Instruction ins)
    {
        code_.push_back(ins);
        return static_cast<int>(code_.size()) - 1;
    }

    int fold(const std::vector<ExprPtr> &children, OpCode op)
    {
        int acc = lower(*children.front());
        for (std::size_t i = 1; i < children.size(); ++i) {
            const int next = lower(*children[i]);
            acc = emit({.op = op, .lhs = acc, .rhs = next});
        }
        return acc;
    }

    int slot_index(SlotKey key)
    {
        const auto it = std::find(slots_.begin(), slots_.end(), key);
        if (it != slots_.end()) {
            return static_cast<int>(it - slots_.begin());
        }
        slots_.push_back(key);
        return static_cast<int>(slots_.size()) - 1;
    }

    int order_;
    std::vector<Instruction> &code_;
    std::vector<SlotKey> &slots_;
};

// Order-by-order interpreter of a plan. Coefficient k of every instruction is
// produced in one sweep from coefficients <= k of its operands.
class Evaluator
{
public:
    Evaluator(const RecurrencePlan &plan, const KnownSlots &known, double center)
        : plan_(plan), center_(center), values_(plan.instructions().size())
    {
        for (const auto &key : plan.slots()) {
            const auto it = known.find(key);
            if (it == known.end()) {
                throw std::invalid_argument("slot u" + std::string(static_cast<std::size_t>(key.deriv), '\'') + "["
                                            + std::to_string(key.delay) + "] is not bound");
            }
            if (it->second.center() != center) {
                throw Error(ErrorCode::CenterMismatch, "slot series is not expanded about the segment center");
            }
            slots_.push_back(&it->second);
        }
    }

    // Computes coefficient k of every instruction; returns F(k).
    template <class UnknownAt>
    double step(int k, UnknownAt &&unknown)
    {
        const auto &code = plan_.instructions();
        const auto kk = static_cast<std::size_t>(k);
        for (std::size_t i = 0; i < code.size(); ++i) {
            const auto &ins = code[i];
            double v = 0.0;
            switch (ins.op) {
                case OpCode::Constant:
                    v = k == 0 ? ins.value : 0.0;
                    break;
                case OpCode::Time:
                    v = k == 0 ? center_ : (k == 1 ? 1.0 : 0.0);
                    break;
                case OpCode::Unknown:
                    v = falling_ratio(k, ins.deriv) * unknown(k + ins.deriv);
                    break;
                case OpCode::Known:
                    v = slots_[static_cast<std::size_t>(ins.slot)]->coeff(k);
                    break;
                case OpCode::Add:
                    v = at(ins.lhs)[kk] + at(ins.rhs)[kk];
                    break;
                case OpCode::Sub:
                    v = at(ins.lhs)[kk] - at(ins.rhs)[kk];
                    break;
                case OpCode::Neg:
                    v = -at(ins.lhs)[kk];
                    break;
                case OpCode::Mul: {
                    const auto &a = at(ins.lhs);
                    const auto &b = at(ins.rhs);
                    for (std::size_t l = 0; l <= kk; ++l) {
                        v += a[l] * b[kk - l];
                    }
                    break;
                }
                case OpCode::Div: {
                    const auto &a = at(ins.lhs);
                    const auto &b = at(ins.rhs);
                    const auto &q = values_[i];
                    if (k == 0 && !(std::abs(b[0]) > division_floor(a[0]))) {
                        throw Error(ErrorCode::DivisionBySmallLeadingCoefficient,
                                    "denominator leading coefficient " + std::to_string(b[0])
                                        + " is below the division floor");
                    }
                    v = a[kk];
                    for (std::size_t l = 1; l <= kk; ++l) {
                        v -= b[l] * q[kk - l];
                    }
                    v /= b[0];
                    break;
                }
                case OpCode::Exp: {
                    const auto &g = at(ins.lhs);
                    const auto &e = values_[i];
                    if (k == 0) {
                        v = std::exp(g[0]);
                    } else {
                        for (std::size_t l = 1; l <= kk; ++l) {
                            v += static_cast<double>(l) * g[l] * e[kk - l];
                        }
                        v /= k;
                    }
                    break;
                }
            }
            values_[i].push_back(v);
        }
        return values_[static_cast<std::size_t>(plan_.root())][kk];
    }

private:
    const std::vector<double> &at(int index) const { return values_[static_cast<std::size_t>(index)]; }

    const RecurrencePlan &plan_;
    double center_;
    std::vector<const TruncatedSeries *> slots_;
    std::vector<std::vector<double>> values_;
};

} // namespace

RecurrencePlan compile_expr(const Expr &rhs, int equation_order)
{
    if (equation_order < 1) {
        throw std::invalid_argument("equation order must be at least 1");
    }
    RecurrencePlan plan;
    plan.order_ = equation_order;
    Compiler compiler(equation_order, plan.code_, plan.slots_);
    plan.root_ = compiler.lower(rhs);
    return plan;
}

RecurrencePlan compile_rhs(const DelayModel &m)
{
    return compile_expr(*m.rhs, m.order);
}

TruncatedSeries run_plan(const RecurrencePlan &plan, const KnownSlots &known, std::span<const double> init, int order,
                         double center, PlanTrace *trace)
{
    const int n = plan.equation_order();
    if (static_cast<int>(init.size()) != n) {
        throw std::invalid_argument("run_plan needs exactly one initial coefficient per equation order");
    }
    if (order < n - 1) {
        throw std::invalid_argument("truncation order below the number of initial coefficients");
    }
    std::vector<double> u(init.begin(), init.end());
    u.resize(static_cast<std::size_t>(order) + 1, 0.0);
    Evaluator ev(plan, known, center);
    if (trace) {
        trace->max_unknown_read.clear();
    }
    for (int k = 0; k + n <= order; ++k) {
        const int available = k + n; // U(0..k+n-1) are known
        int max_read = -1;
        const double f = ev.step(k, [&](int index) {
            if (index >= available) {
                throw std::logic_error("recurrence read an unknown coefficient that is not yet computed");
            }
            max_read = std::max(max_read, index);
            return u[static_cast<std::size_t>(index)];
        });
        const double next = f / falling_ratio(k, n);
        if (!std::isfinite(next) || std::abs(next) > kBlowUpMagnitude) {
            throw Error(ErrorCode::NonFiniteCoefficient,
                        "coefficient " + std::to_string(k + n) + " is " + std::to_string(next) + " (blow-up)");
        }
        u[static_cast<std::size_t>(k + n)] = next;
        if (trace) {
            trace->max_unknown_read.push_back(max_read);
        }
    }
    return {center, std::move(u)};
}

std::vector<double> rhs_transform(const RecurrencePlan &plan, const KnownSlots &known, const TruncatedSeries &unknown,
                                  int count)
{
    Evaluator ev(plan, known, unknown.center());
    std::vector<double> f;
    for (int k = 0; k < count; ++k) {
        f.push_back(ev.step(k, [&](int index) { return unknown.coeff(index); }));
    }
    return f;
}

std::vector<double> plan_residual(const RecurrencePlan &plan, const KnownSlots &known, const TruncatedSeries &u)
{
    const int n = plan.equation_order();
    const int count = u.order() - n + 1;
    if (count <= 0) {
        return {};
    }
    const auto f = rhs_transform(plan, known, u, count);
    std::vector<double> r(f.size());
    for (int k = 0; k < count; ++k) {
        r[static_cast<std::size_t>(k)] = falling_ratio(k, n) * u.coeff(k + n) - f[static_cast<std::size_t>(k)];
    }
    return r;
}

TruncatedSeries expand_series(const Expr &e, double center, int order, const SeriesLookup &states)
{
    using namespace node;
    const auto sub_expand = [&](const ExprPtr &x) { return expand_series(*x, center, order, states); };
    return std::visit(
        overloaded{
            [&](const Const &x) { return TruncatedSeries::constant(x.value, center, order); },
            [&](const Time &) { return truncate(TruncatedSeries::time(center), order); },
            [&](const State &x) {
                if (!states) {
                    throw std::logic_error("expand_series: unresolved state reference");
                }
                return truncate(states(x.deriv, x.delay), order);
            },
            [&](const Add &x) {
                auto acc = sub_expand(x.terms.front());
                for (std::size_t i = 1; i < x.terms.size(); ++i) {
                    acc = add(acc, sub_expand(x.terms[i]));
                }
                return acc;
            },
            [&](const Sub &x) { return sub(sub_expand(x.lhs), sub_expand(x.rhs)); },
            [&](const Mul &x) {
                auto acc = sub_expand(x.factors.front());
                for (std::size_t i = 1; i < x.factors.size(); ++i) {
                    acc = mul(acc, sub_expand(x.factors[i]), order);
                }
                return acc;
            },
            [&](const Div &x) { return div(sub_expand(x.num), sub_expand(x.den), order); },
            [&](const Pow &x) {
                const auto base = sub_expand(x.base);
                auto acc = TruncatedSeries::constant(1.0, center, order);
                for (unsigned i = 0; i < x.exponent; ++i) {
                    acc = mul(acc, base, order);
                }
                return acc;
            },
            [&](const Exp &x) { return exp_series(sub_expand(x.arg), order); },
            [&](const Neg &x) { return scale(sub_expand(x.arg), -1.0); },
        },
        e.node);
}

} // namespace ddedtm

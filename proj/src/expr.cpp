#include <ddedtm/expr.hpp>

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <utility>

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

ExprPtr make(auto n)
{
    return std::make_shared<const Expr>(Expr{std::move(n)});
}

std::string format_number(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

template <class... Kinds>
bool is_one_of(const Expr &e)
{
    return (std::holds_alternative<Kinds>(e.node) || ...);
}

std::string wrap(const std::string &s, bool parens)
{
    return parens ? "(" + s + ")" : s;
}

} // namespace

ExprPtr make_const(double value)
{
    return make(node::Const{value});
}
ExprPtr make_time()
{
    return make(node::Time{});
}
ExprPtr make_state(int deriv, int delay)
{
    return make(node::State{deriv, delay});
}
ExprPtr make_add(std::vector<ExprPtr> terms)
{
    return make(node::Add{std::move(terms)});
}
ExprPtr make_sub(ExprPtr lhs, ExprPtr rhs)
{
    return make(node::Sub{std::move(lhs), std::move(rhs)});
}
ExprPtr make_mul(std::vector<ExprPtr> factors)
{
    return make(node::Mul{std::move(factors)});
}
ExprPtr make_div(ExprPtr num, ExprPtr den)
{
    return make(node::Div{std::move(num), std::move(den)});
}
ExprPtr make_pow(ExprPtr base, unsigned exponent)
{
    return make(node::Pow{std::move(base), exponent});
}
ExprPtr make_exp(ExprPtr arg)
{
    return make(node::Exp{std::move(arg)});
}
ExprPtr make_neg(ExprPtr arg)
{
    return make(node::Neg{std::move(arg)});
}

bool structurally_equal(const Expr &a, const Expr &b)
{
    if (a.node.index() != b.node.index()) {
        return false;
    }
    const auto same_list = [](const std::vector<ExprPtr> &x, const std::vector<ExprPtr> &y) {
        if (x.size() != y.size()) {
            return false;
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!structurally_equal(*x[i], *y[i])) {
                return false;
            }
        }
        return true;
    };
    return std::visit(
        overloaded{
            [&](const node::Const &x) { return x.value == std::get<node::Const>(b.node).value; },
            [&](const node::Time &) { return true; },
            [&](const node::State &x) {
                const auto &y = std::get<node::State>(b.node);
                return x.deriv == y.deriv && x.delay == y.delay;
            },
            [&](const node::Add &x) { return same_list(x.terms, std::get<node::Add>(b.node).terms); },
            [&](const node::Sub &x) {
                const auto &y = std::get<node::Sub>(b.node);
                return structurally_equal(*x.lhs, *y.lhs) && structurally_equal(*x.rhs, *y.rhs);
            },
            [&](const node::Mul &x) { return same_list(x.factors, std::get<node::Mul>(b.node).factors); },
            [&](const node::Div &x) {
                const auto &y = std::get<node::Div>(b.node);
                return structurally_equal(*x.num, *y.num) && structurally_equal(*x.den, *y.den);
            },
            [&](const node::Pow &x) {
                const auto &y = std::get<node::Pow>(b.node);
                return x.exponent == y.exponent && structurally_equal(*x.base, *y.base);
            },
            [&](const node::Exp &x) { return structurally_equal(*x.arg, *std::get<node::Exp>(b.node).arg); },
            [&](const node::Neg &x) { return structurally_equal(*x.arg, *std::get<node::Neg>(b.node).arg); },
        },
        a.node);
}

std::string print_expr(const Expr &e)
{
    using namespace node;
    return std::visit(
        overloaded{
            [](const Const &x) {
                // Parsed constants are never negative; a negative literal built by hand
                // prints as a negation.
                return x.value < 0 ? "(-" + format_number(-x.value) + ")" : format_number(x.value);
            },
            [](const Time &) { return std::string("t"); },
            [](const State &x) {
                std::string s = "u" + std::string(static_cast<std::size_t>(x.deriv), '\'');
                if (x.delay > 0) {
                    s += "[" + std::to_string(x.delay) + "]";
                }
                return s;
            },
            [](const Add &x) {
                std::string s;
                for (std::size_t i = 0; i < x.terms.size(); ++i) {
                    const auto &c = *x.terms[i];
                    const bool parens = i == 0 ? is_one_of<Add>(c) : is_one_of<Add, Sub>(c);
                    s += (i == 0 ? "" : " + ") + wrap(print_expr(c), parens);
                }
                return s;
            },
            [](const Sub &x) {
                return print_expr(*x.lhs) + " - " + wrap(print_expr(*x.rhs), is_one_of<Add, Sub>(*x.rhs));
            },
            [](const Mul &x) {
                std::string s;
                for (std::size_t i = 0; i < x.factors.size(); ++i) {
                    const auto &c = *x.factors[i];
                    const bool parens = i == 0 ? is_one_of<Add, Sub, Mul>(c) : is_one_of<Add, Sub, Mul, Div>(c);
                    s += (i == 0 ? "" : " * ") + wrap(print_expr(c), parens);
                }
                return s;
            },
            [](const Div &x) {
                return wrap(print_expr(*x.num), is_one_of<Add, Sub>(*x.num)) + " / "
                       + wrap(print_expr(*x.den), is_one_of<Add, Sub, Mul, Div>(*x.den));
            },
            [](const Pow &x) {
                return wrap(print_expr(*x.base), is_one_of<Add, Sub, Mul, Div, Pow>(*x.base)) + "^"
                       + std::to_string(x.exponent);
            },
            [](const Exp &x) { return "exp(" + print_expr(*x.arg) + ")"; },
            [](const Neg &x) { return "-" + wrap(print_expr(*x.arg), is_one_of<Add, Sub, Mul, Div, Pow>(*x.arg)); },
        },
        e.node);
}

void walk(const Expr &e, const std::function<void(const Expr &)> &visit)
{
    using namespace node;
    visit(e);
    std::visit(overloaded{
                   [](const Const &) {},
                   [](const Time &) {},
                   [](const State &) {},
                   [&](const Add &x) {
                       for (const auto &c : x.terms) {
                           walk(*c, visit);
                       }
                   },
                   [&](const Sub &x) {
                       walk(*x.lhs, visit);
                       walk(*x.rhs, visit);
                   },
                   [&](const Mul &x) {
                       for (const auto &c : x.factors) {
                           walk(*c, visit);
                       }
                   },
                   [&](const Div &x) {
                       walk(*x.num, visit);
                       walk(*x.den, visit);
                   },
                   [&](const Pow &x) { walk(*x.base, visit); },
                   [&](const Exp &x) { walk(*x.arg, visit); },
                   [&](const Neg &x) { walk(*x.arg, visit); },
               },
               e.node);
}

bool contains_state(const Expr &e)
{
    bool found = false;
    walk(e, [&](const Expr &n) { found = found || std::holds_alternative<node::State>(n.node); });
    return found;
}

bool contains_current_state(const Expr &e)
{
    bool found = false;
    walk(e, [&](const Expr &n) {
        if (const auto *s = std::get_if<node::State>(&n.node)) {
            found = found || s->delay == 0;
        }
    });
    return found;
}

double evaluate(const Expr &e, double t, const StateLookup &state)
{
    using namespace node;
    return std::visit(overloaded{
                          [](const Const &x) { return x.value; },
                          [&](const Time &) { return t; },
                          [&](const State &x) {
                              if (!state) {
                                  throw std::logic_error("state reference in a state-free context");
                              }
                              return state(x.deriv, x.delay);
                          },
                          [&](const Add &x) {
                              double acc = 0.0;
                              for (const auto &c : x.terms) {
                                  acc += evaluate(*c, t, state);
                              }
                              return acc;
                          },
                          [&](const Sub &x) { return evaluate(*x.lhs, t, state) - evaluate(*x.rhs, t, state); },
                          [&](const Mul &x) {
                              double acc = 1.0;
                              for (const auto &c : x.factors) {
                                  acc *= evaluate(*c, t, state);
                              }
                              return acc;
                          },
                          [&](const Div &x) { return evaluate(*x.num, t, state) / evaluate(*x.den, t, state); },
                          [&](const Pow &x) {
                              const double b = evaluate(*x.base, t, state);
                              double acc = 1.0;
                              for (unsigned i = 0; i < x.exponent; ++i) {
                                  acc *= b;
                              }
                              return acc;
                          },
                          [&](const Exp &x) { return std::exp(evaluate(*x.arg, t, state)); },
                          [&](const Neg &x) { return -evaluate(*x.arg, t, state); },
                      },
                      e.node);
}

double evaluate(const Expr &e, double t)
{
    return evaluate(e, t, StateLookup{});
}

ExprPtr differentiate(const Expr &e)
{
    using namespace node;
    return std::visit(
        overloaded{
            [](const Const &) { return make_const(0.0); },
            [](const Time &) { return make_const(1.0); },
            [](const State &) -> ExprPtr {
                throw std::logic_error("differentiate: expression contains a state reference");
            },
            [](const Add &x) {
                std::vector<ExprPtr> terms;
                for (const auto &c : x.terms) {
                    terms.push_back(differentiate(*c));
                }
                return make_add(std::move(terms));
            },
            [](const Sub &x) { return make_sub(differentiate(*x.lhs), differentiate(*x.rhs)); },
            [](const Mul &x) {
                std::vector<ExprPtr> terms;
                for (std::size_t i = 0; i < x.factors.size(); ++i) {
                    auto factors = x.factors;
                    factors[i] = differentiate(*x.factors[i]);
                    terms.push_back(make_mul(std::move(factors)));
                }
                return make_add(std::move(terms));
            },
            [](const Div &x) {
                auto numerator = make_sub(make_mul({differentiate(*x.num), x.den}),
                                          make_mul({x.num, differentiate(*x.den)}));
                return make_div(std::move(numerator), make_pow(x.den, 2));
            },
            [](const Pow &x) {
                if (x.exponent == 0) {
                    return make_const(0.0);
                }
                return make_mul({make_const(static_cast<double>(x.exponent)), make_pow(x.base, x.exponent - 1),
                                 differentiate(*x.base)});
            },
            [&](const Exp &x) { return make_mul({make_exp(x.arg), differentiate(*x.arg)}); },
            [](const Neg &x) { return make_neg(differentiate(*x.arg)); },
        },
        e.node);
}

} // namespace ddedtm

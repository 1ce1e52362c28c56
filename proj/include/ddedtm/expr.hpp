#ifndef DDEDTM_EXPR_HPP
#define DDEDTM_EXPR_HPP

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace ddedtm
{

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

namespace node
{

struct Const {
    double value;
};

struct Time {
};

// Derivative `deriv` of the unknown evaluated at t (delay == 0) or at t - tau_delay
// (delay is the 1-based delay index).
struct State {
    int deriv = 0;
    int delay = 0;
};

struct Add {
    std::vector<ExprPtr> terms;
};

struct Sub {
    ExprPtr lhs;
    ExprPtr rhs;
};

struct Mul {
    std::vector<ExprPtr> factors;
};

struct Div {
    ExprPtr num;
    ExprPtr den;
};

struct Pow {
    ExprPtr base;
    unsigned exponent;
};

struct Exp {
    ExprPtr arg;
};

struct Neg {
    ExprPtr arg;
};

} // namespace node

struct Expr {
    std::variant<node::Const, node::Time, node::State, node::Add, node::Sub, node::Mul, node::Div, node::Pow,
                 node::Exp, node::Neg>
        node;
};

ExprPtr make_const(double value);
ExprPtr make_time();
ExprPtr make_state(int deriv, int delay);
ExprPtr make_add(std::vector<ExprPtr> terms);
ExprPtr make_sub(ExprPtr lhs, ExprPtr rhs);
ExprPtr make_mul(std::vector<ExprPtr> factors);
ExprPtr make_div(ExprPtr num, ExprPtr den);
ExprPtr make_pow(ExprPtr base, unsigned exponent);
ExprPtr make_exp(ExprPtr arg);
ExprPtr make_neg(ExprPtr arg);

// Structural equality (constants compared exactly).
bool structurally_equal(const Expr &a, const Expr &b);

// Canonical text form; parse_expr(print_expr(e)) rebuilds e for any parsed e.
std::string print_expr(const Expr &e);

// Visits every node, parents before children.
void walk(const Expr &e, const std::function<void(const Expr &)> &visit);

bool contains_state(const Expr &e);
// True if some State node with delay == 0 occurs.
bool contains_current_state(const Expr &e);

// Point interpreter; state(deriv, delay) supplies the value of each State node.
using StateLookup = std::function<double(int deriv, int delay)>;
double evaluate(const Expr &e, double t, const StateLookup &state);
// Point interpreter for State-free expressions (history functions).
double evaluate(const Expr &e, double t);

// Symbolic d/dt of a State-free expression.
ExprPtr differentiate(const Expr &e);

} // namespace ddedtm

#endif

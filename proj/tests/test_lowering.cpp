#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include <ddedtm/error.hpp>
#include <ddedtm/lowering.hpp>

#include "support.hpp"

using namespace ddedtm;
using testing::uniform;
using testing::uniform_int;

namespace
{

ErrorCode error_of(auto &&fn)
{
    try {
        fn();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidModel;
}

std::vector<double> exp_coeffs(double scale, double rate, int order)
{
    std::vector<double> c;
    double term = scale;
    for (int k = 0; k <= order; ++k) {
        c.push_back(term);
        term *= rate / (k + 1);
    }
    return c;
}

// Random right-hand side for an equation of order n with two delays. Current
// state appears only where the recurrence can stay explicit.
ExprPtr random_rhs(int depth, int n)
{
    if (depth == 0) {
        switch (uniform_int(0, 3)) {
            case 0:
                return make_const(std::round(uniform(-2, 2) * 100) / 100);
            case 1:
                return make_time();
            case 2:
                return make_state(uniform_int(0, n - 1), 0);
            default:
                return make_state(uniform_int(0, n), uniform_int(1, 2));
        }
    }
    const auto sub = [&] { return random_rhs(uniform_int(0, depth - 1), n); };
    const auto delayed_only = [&] {
        return make_add({make_const(2.0), make_mul({make_const(0.3), make_state(uniform_int(0, n), uniform_int(1, 2))})});
    };
    switch (uniform_int(0, 5)) {
        case 0:
            return make_add({sub(), sub()});
        case 1:
            return make_sub(sub(), sub());
        case 2:
            return make_mul({sub(), sub(), sub()});
        case 3:
            return make_div(sub(), delayed_only());
        case 4:
            return make_exp(make_mul({make_const(0.2), make_sub(make_time(), delayed_only())}));
        default:
            return make_pow(sub(), static_cast<unsigned>(uniform_int(0, 3)));
    }
}

} // namespace

TEST_CASE("Hutchinson recurrence on the first segment")
{
    DelayModel m;
    m.delays = {Delay::from_rational(Rational(1, 10))};
    m.rhs = parse_expr("u * (2 - 4*u[1])");
    m.history = parse_expr("1");
    const auto plan = compile_rhs(m);
    REQUIRE(plan.slots().size() == 1);
    CHECK(plan.slots()[0] == SlotKey{0, 1});

    const KnownSlots known{{SlotKey{0, 1}, TruncatedSeries::constant(1.0, 0.0, 3)}};
    const double init[] = {1.0};
    const auto u = run_plan(plan, known, init, 3, 0.0);
    REQUIRE(u.order() == 3);
    CHECK(u[0] == 1.0);
    CHECK(u[1] == -2.0);
    CHECK(u[2] == 2.0);
    CHECK(u[3] == -4.0 / 3.0);
    // U(k+1) = -2/(k+1) U(k)
    for (int k = 0; k < 3; ++k) {
        CHECK(u[k + 1] == doctest::Approx(-2.0 / (k + 1) * u[k]).epsilon(1e-15));
    }
}

TEST_CASE("Hutchinson recurrence on the second segment")
{
    DelayModel m;
    m.delays = {Delay::from_rational(Rational(1, 10))};
    m.rhs = parse_expr("u * (2 - 4*u[1])");
    m.history = parse_expr("1");
    const auto plan = compile_rhs(m);

    const TruncatedSeries u1(0.0, {1.0, -2.0, 2.0, -4.0 / 3.0});
    const KnownSlots known{{SlotKey{0, 1}, delayed_term_series(u1, 0, 0.1, 0.1, 4)}};
    const double init[] = {0.81867};
    const auto u = run_plan(plan, known, init, 4, 0.1);
    const double expected[] = {0.81867, -1.63734, 4.91202, -9.82404, 19.10230};
    for (int k = 0; k <= 4; ++k) {
        CHECK(std::abs(u[k] - expected[k]) <= 1e-5);
    }

    // The delayed factor 2 - 4 u1(t - 0.1) is -2 + 8s - 8s^2 + 16/3 s^3 with s = t - 0.1,
    // so (k+1) U(k+1) is its convolution with U.
    const double factor[] = {-2.0, 8.0, -8.0, 16.0 / 3.0};
    for (int k = 0; k < 4; ++k) {
        double conv = 0.0;
        for (int l = 0; l <= std::min(k, 3); ++l) {
            conv += factor[l] * u[k - l];
        }
        CHECK(u[k + 1] == doctest::Approx(conv / (k + 1)).epsilon(1e-12));
    }
}

TEST_CASE("exponential ODE and linear scaling")
{
    DelayModel m;
    m.rhs = parse_expr("u");
    m.history = parse_expr("1");
    const double init[] = {1.0};
    const auto u = run_plan(compile_rhs(m), {}, init, 10, 0.0);
    double fact = 1.0;
    for (int k = 0; k <= 10; ++k) {
        CHECK(u[k] == doctest::Approx(1.0 / fact).epsilon(1e-15));
        fact *= k + 1;
    }

    m.rhs = parse_expr("-0.5*u");
    const auto v = run_plan(compile_rhs(m), {}, init, 8, 0.3);
    CHECK(v.center() == 0.3);
    const auto expected = exp_coeffs(1.0, -0.5, 8);
    for (int k = 0; k <= 8; ++k) {
        CHECK(v[k] == doctest::Approx(expected[static_cast<std::size_t>(k)]).epsilon(1e-15));
    }
}

TEST_CASE("neutral recurrence on the second segment")
{
    DelayModel m;
    m.delays = {Delay::from_rational(Rational(2)), Delay::from_rational(Rational(1))};
    m.rhs = parse_expr("u * (0.45*(1 - u[1]/3) + 0.3*u'[2]/u[2])");
    m.history = parse_expr("2.3");
    const auto plan = compile_rhs(m);
    CHECK(plan.slots().size() == 3);

    const TruncatedSeries u1(0.0, exp_coeffs(2.3, 0.105, 9));
    const KnownSlots known{
        {SlotKey{0, 1}, TruncatedSeries::constant(2.3, 1.0, 6)},
        {SlotKey{0, 2}, aligned_delayed_term_series(u1, 0, 1.0, 6)},
        {SlotKey{1, 2}, aligned_delayed_term_series(u1, 1, 1.0, 6)},
    };
    const double init[] = {2.3 * std::exp(0.105)};
    const auto u = run_plan(plan, known, init, 6, 1.0);
    const auto expected = exp_coeffs(2.3 * std::exp(0.105), 1.3 * 0.105, 6);
    for (int k = 0; k <= 6; ++k) {
        CHECK(u[k] == doctest::Approx(expected[static_cast<std::size_t>(k)]).epsilon(1e-13));
    }
}

TEST_CASE("state-free plans agree with whole-series expansion")
{
    for (int trial = 0; trial < 100; ++trial) {
        ExprPtr e;
        do {
            e = random_rhs(3, 1);
        } while (contains_state(*e));
        const double center = uniform(-1, 1);
        const auto plan = compile_expr(*e, 1);
        const auto f = rhs_transform(plan, {}, TruncatedSeries::constant(0.0, center, 10), 10);
        const auto ref = expand_series(*e, center, 9);
        const double scale = std::max(1.0, testing::max_abs(ref.coeffs()));
        for (int k = 0; k < 10; ++k) {
            CHECK(std::abs(f[static_cast<std::size_t>(k)] - ref[k]) <= 1e-13 * scale);
        }
    }
}

TEST_CASE("recurrence solutions satisfy the expanded equation")
{
    for (int trial = 0; trial < 100; ++trial) {
        const int n = uniform_int(1, 2);
        const auto rhs = random_rhs(3, n);
        const double center = uniform(0, 1);
        const int order = 8;
        KnownSlots known;
        for (int i = 1; i <= 2; ++i) {
            for (int p = 0; p <= n; ++p) {
                known.emplace(SlotKey{p, i}, TruncatedSeries(center, testing::random_coeffs(order, -0.5, 0.5)));
            }
        }
        const auto plan = compile_expr(*rhs, n);
        std::vector<double> init;
        for (int i = 0; i < n; ++i) {
            init.push_back(uniform(-0.5, 0.5));
        }
        PlanTrace trace;
        const auto u = run_plan(plan, known, init, order, center, &trace);

        const auto lookup = [&](int p, int delay) {
            return delay == 0 ? derivative(u, p) : known.at(SlotKey{p, delay});
        };
        const auto f = expand_series(*rhs, center, order - n, lookup);
        const auto lhs = derivative(u, n);
        const double scale = std::max(1.0, testing::max_abs(lhs.coeffs()));
        for (int k = 0; k <= order - n; ++k) {
            CHECK(std::abs(lhs[k] - f[k]) <= 1e-10 * scale);
        }
        for (const double r : plan_residual(plan, known, u)) {
            CHECK(std::abs(r) <= 1e-10 * scale);
        }

        // U(k+n) never reads an unknown at index k+n or beyond.
        REQUIRE(trace.max_unknown_read.size() == static_cast<std::size_t>(order - n + 1));
        for (int k = 0; k <= order - n; ++k) {
            CHECK(trace.max_unknown_read[static_cast<std::size_t>(k)] < k + n);
        }
    }
}

TEST_CASE("lowering rejections")
{
    CHECK(error_of([] { compile_expr(*parse_expr("1/u"), 1); }) == ErrorCode::UnsupportedCurrentStateDenominator);
    CHECK(error_of([] { compile_expr(*parse_expr("exp(u)"), 1); }) == ErrorCode::UnsupportedCurrentStateInExp);
    CHECK(error_of([] { compile_expr(*parse_expr("u'"), 1); }) == ErrorCode::ImplicitRecurrence);
    CHECK(error_of([] { compile_expr(*parse_expr("u''"), 2); }) == ErrorCode::ImplicitRecurrence);

    const auto plan = compile_expr(*parse_expr("u * u[1]"), 1);
    const double init[] = {1.0};
    CHECK_THROWS_AS(run_plan(plan, {}, init, 3, 0.0), std::invalid_argument);
    const KnownSlots shifted{{SlotKey{0, 1}, TruncatedSeries::constant(1.0, 0.5, 3)}};
    CHECK(error_of([&] { run_plan(plan, shifted, init, 3, 0.0); }) == ErrorCode::CenterMismatch);
    const double two[] = {1.0, 2.0};
    CHECK_THROWS_AS(run_plan(plan, shifted, two, 3, 0.5), std::invalid_argument);
}

TEST_CASE("powers lower to repeated products")
{
    const auto plan = compile_expr(*parse_expr("u^3 * 0 + (t - 1)^0"), 1);
    const double init[] = {2.0};
    const auto u = run_plan(plan, {}, init, 4, 0.0);
    CHECK(u[0] == 2.0);
    CHECK(u[1] == 1.0);
    for (int k = 2; k <= 4; ++k) {
        CHECK(u[k] == 0.0);
    }
}

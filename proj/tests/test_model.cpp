#include <doctest.h>

#include <cmath>
#include <string>
#include <variant>

#include <ddedtm/error.hpp>
#include <ddedtm/model.hpp>

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

ExprPtr random_expr(int depth, bool with_state)
{
    const int leaf_kinds = with_state ? 3 : 2;
    if (depth == 0) {
        switch (uniform_int(0, leaf_kinds - 1)) {
            case 0:
                return make_const(std::round(uniform(-5, 5) * 100) / 100);
            case 1:
                return make_time();
            default:
                return make_state(uniform_int(0, 1), uniform_int(0, 2));
        }
    }
    const auto sub = [&] { return random_expr(uniform_int(0, depth - 1), with_state); };
    switch (uniform_int(0, 6)) {
        case 0:
            return make_add({sub(), sub(), sub()});
        case 1:
            return make_sub(sub(), sub());
        case 2:
            return make_mul({sub(), sub()});
        case 3:
            // Keep denominators away from zero.
            return make_div(sub(), make_add({make_const(3.5), make_exp(make_mul({make_const(0.1), sub()}))}));
        case 4:
            return make_pow(sub(), static_cast<unsigned>(uniform_int(0, 3)));
        case 5:
            return make_exp(make_mul({make_const(0.1), sub()}));
        default:
            return make_neg(sub());
    }
}

double lookup(int deriv, int delay)
{
    return 0.3 + 0.7 * deriv - 0.45 * delay;
}

} // namespace

TEST_CASE("parse_expr builds the expected trees")
{
    const auto e = parse_expr("u * (2 - 4*u[1])");
    CHECK(evaluate(*e, 0.0, [](int d, int i) { return d == 0 && i == 0 ? 0.5 : 1.0; }) == doctest::Approx(-1.0));
    CHECK(print_expr(*e) == "u * (2 - 4 * u[1])");

    const auto n = parse_expr("u'[2] / u[2]");
    const auto *div = std::get_if<node::Div>(&n->node);
    REQUIRE(div != nullptr);
    const auto *num = std::get_if<node::State>(&div->num->node);
    REQUIRE(num != nullptr);
    CHECK(num->deriv == 1);
    CHECK(num->delay == 2);

    CHECK(evaluate(*parse_expr("2^3 - -1"), 0.0) == 9.0);
    CHECK(evaluate(*parse_expr("exp(t) * 1.5e-1"), 0.0) == doctest::Approx(0.15));
    CHECK(evaluate(*parse_expr("1 - 2 - 3"), 0.0) == -4.0);
    CHECK(evaluate(*parse_expr("8 / 4 / 2"), 0.0) == 1.0);
    CHECK(evaluate(*parse_expr("t^2 * t"), 2.0) == 8.0);
}

TEST_CASE("parse_expr errors")
{
    CHECK(error_of([] { parse_expr("u * (1 +"); }) == ErrorCode::SyntaxError);
    CHECK(error_of([] { parse_expr("u ^ 1.5"); }) == ErrorCode::NonIntegerExponent);
    CHECK(error_of([] { parse_expr("u ^ t"); }) == ErrorCode::NonIntegerExponent);
    CHECK(error_of([] { parse_expr("u[0]"); }) == ErrorCode::UnknownDelayIndex);
    CHECK(error_of([] { parse_expr("sin(t)"); }) == ErrorCode::SyntaxError);
    try {
        parse_expr("1 + ?");
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(e.column() == 5);
    }
}

TEST_CASE("printing then parsing is a fixed point")
{
    for (int trial = 0; trial < 250; ++trial) {
        const auto original = random_expr(4, true);
        const auto once = parse_expr(print_expr(*original));
        const auto twice = parse_expr(print_expr(*once));
        CHECK(structurally_equal(*once, *twice));
        CHECK(print_expr(*once) == print_expr(*twice));
        const double t = uniform(-1, 1);
        const double a = evaluate(*original, t, lookup);
        const double b = evaluate(*once, t, lookup);
        CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("differentiate matches central differences")
{
    for (int trial = 0; trial < 100; ++trial) {
        const auto e = random_expr(3, false);
        const auto d = differentiate(*e);
        const double t = uniform(-0.5, 0.5);
        const double h = 1e-5;
        const double fd = (evaluate(*e, t + h) - evaluate(*e, t - h)) / (2 * h);
        CHECK(std::abs(evaluate(*d, t) - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
    CHECK_THROWS(differentiate(*parse_expr("u")));
}

TEST_CASE("parse_model")
{
    const auto m = parse_model("order = 1\n"
                               "delays = [1/10]\n"
                               "rhs = \"u * (2 - 4*u[1])\"\n"
                               "history = \"1\"\n"
                               "T = 0.5\n"
                               "N = [3, 4, 5, 6, 7]\n");
    CHECK(m.order == 1);
    REQUIRE(m.delays.size() == 1);
    CHECK(m.delays[0].exact == Rational(1, 10));
    CHECK(m.delays[0].value == 0.1);
    CHECK(m.t0 == 0.0);
    CHECK(m.T == 0.5);
    CHECK(m.truncation.at(1) == 3);
    CHECK(m.truncation.at(5) == 7);
    CHECK(m.truncation.at(9) == 7);
    CHECK(m.all_delays_exact());

    const auto ode = parse_model("# exponential\nrhs = \"u\"\nhistory = \"1\"\nT = 1\n");
    CHECK(ode.delays.empty());
    CHECK(ode.max_delay() == 0.0);
    CHECK(ode.truncation.at(1) == kDefaultTruncationOrder);

    const auto neutral = parse_model("delays = [2, 1]\nrhs = \"u * (0.45*(1 - u[1]/3) + 0.3*u'[2]/u[2])\"\n"
                                     "history = \"2.3\"\nT = 2\nN = 20\n");
    CHECK(neutral.max_delay() == 2.0);

    const auto floating = parse_model("delays = [1.0, 3.141592653589793]\nrhs = \"u*(1 - u[1] - u[2])\"\n"
                                      "history = \"1\"\nT = 4\n");
    CHECK_FALSE(floating.delays[0].exact.has_value());
    CHECK_FALSE(floating.all_delays_exact());
}

TEST_CASE("parse_model errors")
{
    CHECK(error_of([] { parse_model("rhs = \"u\"\nhistory = \"1\"\nT = 0\n"); }) == ErrorCode::InvalidModel);
    try {
        parse_model("rhs = \"u\"\nhistory = \"1\"\nT = -1\nt0 = 0\n");
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(std::string(e.what()).find("T must be greater than t0") != std::string::npos);
    }
    CHECK(error_of([] { parse_model("rhs = \"u[2]\"\ndelays = [1]\nhistory = \"1\"\nT = 1\n"); })
          == ErrorCode::UnknownDelayIndex);
    CHECK(error_of([] { parse_model("rhs = \"u''[1]\"\ndelays = [1]\nhistory = \"1\"\nT = 1\n"); })
          == ErrorCode::DerivativeOrderTooHigh);
    CHECK(error_of([] { parse_model("rhs = \"u\"\nhistory = \"u\"\nT = 1\n"); }) == ErrorCode::HistoryContainsState);
    CHECK(error_of([] { parse_model("rhs = \"u\"\nhistory = \"1\"\nT = 1\ndelays = [0]\n"); })
          == ErrorCode::InvalidModel);
    CHECK(error_of([] { parse_model("rhs = \"u\"\nhistory = \"1\"\nT = 1\ndelays = [1, 1]\n"); })
          == ErrorCode::InvalidModel);
    CHECK(error_of([] { parse_model("rhs = \"u\"\nhistory = \"1\"\nT = 1\nfoo = 2\n"); }) == ErrorCode::SyntaxError);
    CHECK(error_of([] { parse_model("rhs = \"u\"\nhistory = \"1\"\n"); }) == ErrorCode::SyntaxError);
    CHECK(error_of([] { parse_model("order = 2\nrhs = \"-u\"\nhistory = \"t\"\nT = 1\nN = 1\n"); })
          == ErrorCode::InvalidModel);
    CHECK(error_of([] { parse_model("order = 2\nrhs = \"-u\"\nhistory = \"t\"\nT = 1\nic = [0, 2]\n"); })
          == ErrorCode::InconsistentInitialValues);
    try {
        parse_model("rhs = \"u\"\nrhs = \"u\"\nhistory = \"1\"\nT = 1\n");
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::SyntaxError);
        CHECK(e.line() == 2);
    }
}

TEST_CASE("validate_model")
{
    const auto hutchinson = parse_model("delays = [1/10]\nrhs = \"u * (2 - 4*u[1])\"\nhistory = \"1\"\nT = 0.5\n");
    auto report = validate_model(hutchinson);
    CHECK(report.diagnostics.empty());
    CHECK(report.model_class == ModelClass::Delayed);
    CHECK(to_string(report.model_class) == "delayed");

    const auto neutral = parse_model("delays = [2, 1]\nrhs = \"u * (0.45*(1 - u[1]/3) + 0.3*u'[2]/u[2])\"\n"
                                     "history = \"2.3\"\nT = 2\n");
    report = validate_model(neutral);
    CHECK(report.diagnostics.empty());
    CHECK(report.model_class == ModelClass::Neutral);

    const auto ode = parse_model("rhs = \"u\"\nhistory = \"1\"\nT = 1\n");
    CHECK(classify(ode) == ModelClass::Ode);
    CHECK(validate_model(ode).diagnostics.empty());

    const auto check_blocked = [](const char *rhs, const char *code) {
        const auto m = parse_model(std::string("delays = [1]\nrhs = \"") + rhs + "\"\nhistory = \"1\"\nT = 1\n");
        const auto r = validate_model(m);
        CHECK(r.blocked());
        bool found = false;
        for (const auto &d : r.diagnostics) {
            found = found || d.code == code;
        }
        CHECK_MESSAGE(found, rhs);
    };
    check_blocked("1/u + u[1]", "UnsupportedCurrentStateDenominator");
    check_blocked("exp(u) * u[1]", "UnsupportedCurrentStateInExp");
    check_blocked("u' + u[1]", "ImplicitRecurrence");

    const auto unused = parse_model("delays = [1, 2]\nrhs = \"u * u[1]\"\nhistory = \"1\"\nT = 1\n");
    report = validate_model(unused);
    REQUIRE(report.diagnostics.size() == 1);
    CHECK(report.diagnostics[0].code == "UnusedDelay");
    CHECK(report.diagnostics[0].severity == Severity::Warning);
    CHECK_FALSE(report.blocked());
}

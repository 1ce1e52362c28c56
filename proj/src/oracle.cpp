#include <ddedtm/oracle.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include <ddedtm/error.hpp>

namespace ddedtm
{

DenseTrajectory::DenseTrajectory(double t0, double h, int dimension, std::vector<double> values,
                                 std::vector<double> slopes)
    : t0_(t0), h_(h), dim_(dimension), values_(std::move(values)), slopes_(std::move(slopes))
{
    if (dim_ < 1 || values_.empty() || values_.size() % static_cast<std::size_t>(dim_) != 0
        || slopes_.size() != values_.size() || !(h_ > 0.0)) {
        throw std::invalid_argument("inconsistent trajectory data");
    }
}

DenseTrajectory DenseTrajectory::tabulate(const std::function<double(double)> &f,
                                          const std::function<double(double)> &df, double t0, double T, double h)
{
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil((T - t0) / h - 1e-9)));
    const double step = (T - t0) / static_cast<double>(steps);
    std::vector<double> v;
    std::vector<double> s;
    for (std::size_t i = 0; i <= steps; ++i) {
        const double t = i == steps ? T : t0 + static_cast<double>(i) * step;
        v.push_back(f(t));
        s.push_back(df(t));
    }
    return {t0, step, 1, std::move(v), std::move(s)};
}

double DenseTrajectory::node_value(std::size_t i, int component) const
{
    return values_.at(i * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(component));
}

double DenseTrajectory::node_slope(std::size_t i, int component) const
{
    return slopes_.at(i * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(component));
}

namespace
{

struct HermiteSpan {
    double y0, m0, y1, m1, h, theta;
};

// Locates t among nodes 0..count-1 (count >= 2), clamping to the end intervals.
// A t on a node belongs to the interval on its right unless side is negative.
HermiteSpan hermite_span(double t0, double h, std::size_t count, double t,
                         const std::function<double(std::size_t)> &y, const std::function<double(std::size_t)> &m,
                         int side = 1)
{
    const double x = (t - t0) / h;
    const double pick = side < 0 ? std::ceil(x - 1e-9) - 1.0 : std::floor(x + 1e-9);
    auto i = static_cast<std::size_t>(std::clamp(pick, 0.0, static_cast<double>(count - 2)));
    return {y(i), m(i), y(i + 1), m(i + 1), h, x - static_cast<double>(i)};
}

double hermite_value(const HermiteSpan &s)
{
    const double t = s.theta;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * s.y0 + (t3 - 2 * t2 + t) * s.h * s.m0 + (-2 * t3 + 3 * t2) * s.y1
           + (t3 - t2) * s.h * s.m1;
}

double hermite_slope(const HermiteSpan &s)
{
    const double t = s.theta;
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * s.y0 + (3 * t2 - 4 * t + 1) * s.h * s.m0 + (-6 * t2 + 6 * t) * s.y1
            + (3 * t2 - 2 * t) * s.h * s.m1)
           / s.h;
}

} // namespace

double DenseTrajectory::value(double t, int component) const
{
    const auto count = node_count();
    if (count == 1) {
        return node_value(0, component);
    }
    return hermite_value(hermite_span(
        t0_, h_, count, t, [&](std::size_t i) { return node_value(i, component); },
        [&](std::size_t i) { return node_slope(i, component); }));
}

double DenseTrajectory::slope(double t, int component) const
{
    const auto count = node_count();
    if (count == 1) {
        return node_slope(0, component);
    }
    return hermite_slope(hermite_span(
        t0_, h_, count, t, [&](std::size_t i) { return node_value(i, component); },
        [&](std::size_t i) { return node_slope(i, component); }));
}

DenseTrajectory rk_solve(const DelayModel &m, double h)
{
    check_model(m);
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw std::invalid_argument("step size must be positive");
    }
    for (const auto &d : m.delays) {
        if (h > d.value) {
            throw Error(ErrorCode::StepTooLarge, "step " + std::to_string(h) + " exceeds the delay "
                                                     + std::to_string(d.value));
        }
    }
    const int n = m.order;
    const auto dim = static_cast<std::size_t>(n);
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil((m.T - m.t0) / h - 1e-9)));
    const double step = (m.T - m.t0) / static_cast<double>(steps);

    // phi, phi', ..., phi^(n)
    std::vector<ExprPtr> history{m.history};
    for (int p = 1; p <= n; ++p) {
        history.push_back(differentiate(*history.back()));
    }

    std::vector<double> values;
    std::vector<double> slopes;
    values.reserve((steps + 1) * dim);
    slopes.reserve((steps + 1) * dim);

    // Interpolates over nodes whose slopes are already stored.
    const auto lookup = [&](double s, int p, int side) {
        const std::size_t known = slopes.size() / dim;
        const auto comp = static_cast<std::size_t>(std::min(p, n - 1));
        const auto y = [&](std::size_t i) { return values[i * dim + comp]; };
        const auto dy = [&](std::size_t i) { return slopes[i * dim + comp]; };
        if (known == 0) {
            throw std::logic_error("delayed lookup before the first node");
        }
        if (known == 1) {
            return p < n ? y(0) : dy(0);
        }
        const auto span = hermite_span(m.t0, step, known, s, y, dy, side);
        return p < n ? hermite_value(span) : hermite_slope(span);
    };

    std::vector<double> f(dim);
    // side picks the one-sided limit of a delayed derivative that jumps exactly at
    // the delayed argument: +1 at the start of a step, -1 at its end.
    const auto derivative_of = [&](double t, const std::vector<double> &y, std::vector<double> &out, int side) {
        const auto state = [&](int p, int delay) -> double {
            if (delay == 0) {
                return y[static_cast<std::size_t>(p)];
            }
            const double s = t - m.delays[static_cast<std::size_t>(delay - 1)].value;
            if (side < 0 ? s <= m.t0 + 1e-9 * step : s < m.t0 - 1e-9 * step) {
                return evaluate(*history[static_cast<std::size_t>(p)], s);
            }
            return lookup(s, p, side);
        };
        for (std::size_t i = 0; i + 1 < dim; ++i) {
            out[i] = y[i + 1];
        }
        out[dim - 1] = evaluate(*m.rhs, t, state);
    };

    std::vector<double> y(dim);
    for (int p = 0; p < n; ++p) {
        y[static_cast<std::size_t>(p)] = m.initial_values ? (*m.initial_values)[static_cast<std::size_t>(p)]
                                                          : evaluate(*history[static_cast<std::size_t>(p)], m.t0);
    }

    const auto check_state = [&](double t, const std::vector<double> &v) {
        for (const double x : v) {
            if (!std::isfinite(x) || std::abs(x) > 1e100) {
                throw Error(ErrorCode::NonFiniteState, "state blew up near t = " + std::to_string(t));
            }
        }
    };

    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    for (std::size_t i = 0;; ++i) {
        const double t = m.t0 + static_cast<double>(i) * step;
        values.insert(values.end(), y.begin(), y.end());
        derivative_of(t, y, k1, 1);
        check_state(t, k1);
        slopes.insert(slopes.end(), k1.begin(), k1.end());
        if (i == steps) {
            break;
        }
        for (std::size_t c = 0; c < dim; ++c) {
            tmp[c] = y[c] + 0.5 * step * k1[c];
        }
        derivative_of(t + 0.5 * step, tmp, k2, 1);
        for (std::size_t c = 0; c < dim; ++c) {
            tmp[c] = y[c] + 0.5 * step * k2[c];
        }
        derivative_of(t + 0.5 * step, tmp, k3, 1);
        for (std::size_t c = 0; c < dim; ++c) {
            tmp[c] = y[c] + step * k3[c];
        }
        derivative_of(t + step, tmp, k4, -1);
        for (std::size_t c = 0; c < dim; ++c) {
            y[c] += step / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        check_state(t + step, y);
    }
    return {m.t0, step, n, std::move(values), std::move(slopes)};
}

ComparisonReport compare(const std::function<double(double)> &lhs, const std::function<double(double)> &rhs,
                         double t_start, double t_end, double step)
{
    ComparisonReport report;
    report.argmax_t = t_start;
    for (const double t : uniform_grid(t_start, t_end, step)) {
        const double a = lhs(t);
        const double b = rhs(t);
        const double d = std::abs(a - b);
        report.rows.push_back({t, a, b, d});
        if (!(d <= report.max_abs_diff)) { // NaN propagates
            report.max_abs_diff = d;
            report.argmax_t = t;
        }
    }
    return report;
}

ComparisonReport compare(const PiecewiseSolution &sol, const DenseTrajectory &traj, double step)
{
    const auto &m = sol.model();
    return compare([&](double t) { return eval_solution(sol, t); }, [&](double t) { return traj.value(t); }, m.t0,
                   m.T, step);
}

} // namespace ddedtm

#include <ddedtm/series.hpp>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include <ddedtm/error.hpp>

namespace ddedtm
{

namespace
{

void require_same_center(const TruncatedSeries &a, const TruncatedSeries &b)
{
    if (a.center() != b.center()) {
        throw Error(ErrorCode::CenterMismatch,
                    "series centers differ (" + std::to_string(a.center()) + " vs " + std::to_string(b.center()) + ")");
    }
}

void require_order(int order)
{
    if (order < 0) {
        throw std::invalid_argument("truncation order must be non-negative");
    }
}

} // namespace

TruncatedSeries::TruncatedSeries(double center, std::vector<double> coeffs) : center_(center), coeffs_(std::move(coeffs))
{
    if (coeffs_.empty()) {
        throw std::invalid_argument("a truncated series needs at least one coefficient");
    }
    if (!std::isfinite(center_)) {
        throw Error(ErrorCode::NonFiniteCoefficient, "series center is not finite");
    }
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        if (!std::isfinite(coeffs_[k])) {
            throw Error(ErrorCode::NonFiniteCoefficient, "coefficient " + std::to_string(k) + " is not finite");
        }
    }
}

TruncatedSeries TruncatedSeries::constant(double value, double center, int order)
{
    require_order(order);
    std::vector<double> c(static_cast<std::size_t>(order) + 1, 0.0);
    c[0] = value;
    return {center, std::move(c)};
}

TruncatedSeries TruncatedSeries::time(double center, int order)
{
    require_order(order);
    std::vector<double> c(static_cast<std::size_t>(order) + 1, 0.0);
    c[0] = center;
    if (order >= 1) {
        c[1] = 1.0;
    }
    return {center, std::move(c)};
}

double eval(const TruncatedSeries &s, double t) noexcept
{
    const auto c = s.coeffs();
    const double x = t - s.center();
    double acc = c.back();
    for (auto k = c.size() - 1; k-- > 0;) {
        acc = acc * x + c[k];
    }
    return acc;
}

TruncatedSeries truncate(const TruncatedSeries &s, int order)
{
    require_order(order);
    std::vector<double> c(static_cast<std::size_t>(order) + 1, 0.0);
    for (int k = 0; k <= order; ++k) {
        c[static_cast<std::size_t>(k)] = s.coeff(k);
    }
    return {s.center(), std::move(c)};
}

TruncatedSeries recenter(const TruncatedSeries &s, double center)
{
    return {center, {s.coeffs().begin(), s.coeffs().end()}};
}

TruncatedSeries add(const TruncatedSeries &a, const TruncatedSeries &b)
{
    require_same_center(a, b);
    const int n = std::max(a.order(), b.order());
    std::vector<double> c(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        c[static_cast<std::size_t>(k)] = a.coeff(k) + b.coeff(k);
    }
    return {a.center(), std::move(c)};
}

TruncatedSeries sub(const TruncatedSeries &a, const TruncatedSeries &b)
{
    require_same_center(a, b);
    const int n = std::max(a.order(), b.order());
    std::vector<double> c(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        c[static_cast<std::size_t>(k)] = a.coeff(k) - b.coeff(k);
    }
    return {a.center(), std::move(c)};
}

TruncatedSeries scale(const TruncatedSeries &s, double factor)
{
    std::vector<double> c(s.coeffs().begin(), s.coeffs().end());
    for (auto &x : c) {
        x *= factor;
    }
    return {s.center(), std::move(c)};
}

TruncatedSeries mul(const TruncatedSeries &a, const TruncatedSeries &b, int order)
{
    require_same_center(a, b);
    require_order(order);
    std::vector<double> c(static_cast<std::size_t>(order) + 1, 0.0);
    for (int k = 0; k <= order; ++k) {
        const int lo = std::max(0, k - b.order());
        const int hi = std::min(k, a.order());
        double acc = 0.0;
        for (int l = lo; l <= hi; ++l) {
            acc += a.coeff(l) * b.coeff(k - l);
        }
        c[static_cast<std::size_t>(k)] = acc;
    }
    return {a.center(), std::move(c)};
}

TruncatedSeries product_nfold(std::span<const TruncatedSeries> factors, int order)
{
    if (factors.empty()) {
        return TruncatedSeries::constant(1.0, 0.0, order);
    }
    for (const auto &f : factors) {
        require_same_center(factors.front(), f);
    }
    require_order(order);
    const auto q = factors.size();
    std::vector<double> c(static_cast<std::size_t>(order) + 1, 0.0);
    // Enumerate s_1 + ... + s_{q-1} <= k; the last factor takes the remainder.
    std::vector<int> idx(q, 0);
    for (int k = 0; k <= order; ++k) {
        double total = 0.0;
        std::function<void(std::size_t, int, double)> visit = [&](std::size_t i, int remaining, double partial) {
            if (i + 1 == q) {
                total += partial * factors[i].coeff(remaining);
                return;
            }
            for (int s = 0; s <= remaining; ++s) {
                visit(i + 1, remaining - s, partial * factors[i].coeff(s));
            }
        };
        visit(0, k, 1.0);
        c[static_cast<std::size_t>(k)] = total;
    }
    return {factors.front().center(), std::move(c)};
}

double falling_ratio(int k, int p) noexcept
{
    double r = 1.0;
    for (int i = 1; i <= p; ++i) {
        r *= static_cast<double>(k + i);
    }
    return r;
}

TruncatedSeries derivative(const TruncatedSeries &s, int p)
{
    if (p < 0) {
        throw std::invalid_argument("derivative order must be non-negative");
    }
    if (p > s.order()) {
        throw Error(ErrorCode::OrderTooLow, "cannot take derivative " + std::to_string(p) + " of a series of order "
                                                + std::to_string(s.order()));
    }
    const int n = s.order() - p;
    std::vector<double> c(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        c[static_cast<std::size_t>(k)] = falling_ratio(k, p) * s.coeff(k + p);
    }
    return {s.center(), std::move(c)};
}

double division_floor(double numerator_leading) noexcept
{
    return 1e-12 * std::max(1.0, std::abs(numerator_leading));
}

TruncatedSeries div(const TruncatedSeries &num, const TruncatedSeries &den, int order)
{
    require_same_center(num, den);
    require_order(order);
    const double d0 = den.coeff(0);
    if (!(std::abs(d0) > division_floor(num.coeff(0)))) {
        throw Error(ErrorCode::DivisionBySmallLeadingCoefficient,
                    "denominator leading coefficient " + std::to_string(d0) + " is below the division floor");
    }
    std::vector<double> q(static_cast<std::size_t>(order) + 1, 0.0);
    for (int k = 0; k <= order; ++k) {
        double acc = num.coeff(k);
        for (int l = 1; l <= std::min(k, den.order()); ++l) {
            acc -= den.coeff(l) * q[static_cast<std::size_t>(k - l)];
        }
        q[static_cast<std::size_t>(k)] = acc / d0;
    }
    return {num.center(), std::move(q)};
}

TruncatedSeries exp_series(const TruncatedSeries &g, int order)
{
    require_order(order);
    std::vector<double> e(static_cast<std::size_t>(order) + 1, 0.0);
    e[0] = std::exp(g.coeff(0));
    for (int k = 1; k <= order; ++k) {
        double acc = 0.0;
        for (int l = 1; l <= std::min(k, g.order()); ++l) {
            acc += l * g.coeff(l) * e[static_cast<std::size_t>(k - l)];
        }
        e[static_cast<std::size_t>(k)] = acc / k;
    }
    return {g.center(), std::move(e)};
}

TruncatedSeries taylor_shift_binomial(const TruncatedSeries &s, double new_center)
{
    const double d = new_center - s.center();
    const int n = s.order();
    std::vector<double> b(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 0; k <= n; ++k) {
        double acc = 0.0;
        double binom = 1.0; // C(y, k), starting at y = k
        double power = 1.0; // d^(y-k)
        for (int y = k; y <= n; ++y) {
            acc += binom * power * s.coeff(y);
            binom = binom * (y + 1) / (y + 1 - k);
            power *= d;
        }
        b[static_cast<std::size_t>(k)] = acc;
    }
    return {new_center, std::move(b)};
}

TruncatedSeries taylor_shift(const TruncatedSeries &s, double new_center)
{
    const double d = new_center - s.center();
    std::vector<double> c(s.coeffs().begin(), s.coeffs().end());
    const auto n = c.size();
    if (d != 0.0) {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (auto k = n - 1; k-- > i;) {
                c[k] += d * c[k + 1];
            }
        }
    }
#ifndef NDEBUG
    {
        const auto check = taylor_shift_binomial(s, new_center);
        for (std::size_t k = 0; k < n; ++k) {
            // Scale by the sum of absolute terms so cancellation does not trip the check.
            double magnitude = 0.0;
            double binom = 1.0;
            double power = 1.0;
            for (std::size_t y = k; y < n; ++y) {
                magnitude += binom * power * std::abs(s[y]);
                binom = binom * static_cast<double>(y + 1) / static_cast<double>(y + 1 - k);
                power *= std::abs(d);
            }
            assert(std::abs(check[k] - c[k]) <= 1e-10 * std::max(magnitude, 1e-300));
        }
    }
#endif
    return {new_center, std::move(c)};
}

TruncatedSeries aligned_delayed_term_series(const TruncatedSeries &source, int p, double target_center, int order)
{
    require_order(order);
    return recenter(truncate(derivative(source, p), order), target_center);
}

TruncatedSeries delayed_term_series(const TruncatedSeries &source, int p, double tau, double target_center, int order)
{
    const double expansion_point = target_center - tau;
    if (expansion_point == source.center()) {
        return aligned_delayed_term_series(source, p, target_center, order);
    }
    const auto shifted = taylor_shift(source, expansion_point);
    return recenter(truncate(derivative(shifted, p), order), target_center);
}

} // namespace ddedtm

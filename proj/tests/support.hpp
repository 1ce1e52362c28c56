#ifndef DDEDTM_TESTS_SUPPORT_HPP
#define DDEDTM_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace testing
{

inline std::mt19937_64 &rng()
{
    static std::mt19937_64 gen(20240611);
    return gen;
}

inline double uniform(double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline int uniform_int(int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng());
}

inline std::vector<double> random_coeffs(int degree, double lo = -2.0, double hi = 2.0)
{
    std::vector<double> c(static_cast<std::size_t>(degree) + 1);
    for (auto &x : c) {
        x = uniform(lo, hi);
    }
    // Keep the top coefficient away from zero so the degree is exact.
    if (std::abs(c.back()) < 0.1) {
        c.back() = 0.5;
    }
    return c;
}

inline double max_abs(std::span<const double> v)
{
    double m = 0.0;
    for (const double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

inline double rel_diff(double a, double b)
{
    return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

} // namespace testing

#endif

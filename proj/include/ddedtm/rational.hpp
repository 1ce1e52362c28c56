#ifndef DDEDTM_RATIONAL_HPP
#define DDEDTM_RATIONAL_HPP

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace ddedtm
{

// Exact rational in lowest terms with a positive denominator. Arithmetic that
// would overflow 64 bits throws std::overflow_error.
class Rational
{
public:
    Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1);

    // Accepts "p/q" or a plain integer "p".
    static Rational parse(std::string_view text);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::string str() const;

    friend bool operator==(const Rational &, const Rational &) = default;
    friend std::strong_ordering operator<=>(const Rational &a, const Rational &b);

    friend Rational operator+(const Rational &a, const Rational &b);
    friend Rational operator-(const Rational &a, const Rational &b);
    friend Rational operator*(const Rational &a, const Rational &b);
    friend Rational operator/(const Rational &a, const Rational &b);

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

// Largest rational g with every value an integer multiple of g. Empty input or a
// non-positive value throws std::invalid_argument.
Rational rational_gcd(std::span<const Rational> values);

} // namespace ddedtm

#endif

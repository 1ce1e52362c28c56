#include <ddedtm/rational.hpp>

#include <charconv>
#include <numeric>
#include <stdexcept>

namespace ddedtm
{

namespace
{

__extension__ typedef __int128 wide_int;

std::int64_t checked_mul(std::int64_t a, std::int64_t b)
{
    std::int64_t r = 0;
    if (__builtin_mul_overflow(a, b, &r)) {
        throw std::overflow_error("rational arithmetic overflow");
    }
    return r;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b)
{
    std::int64_t r = 0;
    if (__builtin_add_overflow(a, b, &r)) {
        throw std::overflow_error("rational arithmetic overflow");
    }
    return r;
}

std::int64_t parse_int(std::string_view text)
{
    std::int64_t v = 0;
    const auto *first = text.data();
    const auto *last = text.data() + text.size();
    if (!text.empty() && text.front() == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last || first == last) {
        throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
    }
    return v;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    return s;
}

} // namespace

Rational::Rational(std::int64_t num, std::int64_t den)
{
    if (den == 0) {
        throw std::invalid_argument("rational with zero denominator");
    }
    if (den < 0) {
        num = checked_mul(num, -1);
        den = checked_mul(den, -1);
    }
    const auto g = std::gcd(num, den);
    num_ = num / g;
    den_ = den / g;
}

Rational Rational::parse(std::string_view text)
{
    text = trim(text);
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        return {parse_int(text), 1};
    }
    return {parse_int(trim(text.substr(0, slash))), parse_int(trim(text.substr(slash + 1)))};
}

std::string Rational::str() const
{
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

std::strong_ordering operator<=>(const Rational &a, const Rational &b)
{
    return static_cast<wide_int>(a.num_) * b.den_ <=> static_cast<wide_int>(b.num_) * a.den_;
}

Rational operator+(const Rational &a, const Rational &b)
{
    const auto l = std::lcm(a.den_, b.den_);
    return {checked_add(checked_mul(a.num_, l / a.den_), checked_mul(b.num_, l / b.den_)), l};
}

Rational operator-(const Rational &a, const Rational &b)
{
    return a + Rational(checked_mul(b.num_, -1), b.den_);
}

Rational operator*(const Rational &a, const Rational &b)
{
    // Cross-reduce first to keep intermediates small.
    const auto g1 = std::gcd(a.num_, b.den_);
    const auto g2 = std::gcd(b.num_, a.den_);
    return {checked_mul(a.num_ / g1, b.num_ / g2), checked_mul(a.den_ / g2, b.den_ / g1)};
}

Rational operator/(const Rational &a, const Rational &b)
{
    if (b.num_ == 0) {
        throw std::domain_error("rational division by zero");
    }
    return a * Rational(b.den_, b.num_);
}

Rational rational_gcd(std::span<const Rational> values)
{
    if (values.empty()) {
        throw std::invalid_argument("rational_gcd of an empty list");
    }
    std::int64_t num = 0;
    std::int64_t den = 1;
    for (const auto &v : values) {
        if (v.num() <= 0) {
            throw std::invalid_argument("rational_gcd needs positive values");
        }
        num = std::gcd(num, v.num());
        den = std::lcm(den, v.den());
        if (den <= 0) {
            throw std::overflow_error("rational arithmetic overflow");
        }
    }
    // With each value in lowest terms, gcd(numerators) / lcm(denominators) is the
    // largest common unit.
    return {num, den};
}

} // namespace ddedtm

#ifndef DDEDTM_SERIES_HPP
#define DDEDTM_SERIES_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace ddedtm
{

// Finite Taylor polynomial sum_{k=0}^{N} c_k (t - center)^k. The coefficient
// c_k is the k-th differential transform u^(k)(center) / k!.
//
// Values are immutable once built. The coefficient list is never empty and
// every stored number is finite.
class TruncatedSeries
{
public:
    TruncatedSeries(double center, std::vector<double> coeffs);

    static TruncatedSeries constant(double value, double center = 0.0, int order = 0);
    // The identity function t, expanded about center: [center, 1].
    static TruncatedSeries time(double center, int order = 1);

    double center() const noexcept { return center_; }
    int order() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    std::span<const double> coeffs() const noexcept { return coeffs_; }

    double operator[](std::size_t k) const { return coeffs_[k]; }
    // Coefficient k, or zero past the stored order.
    double coeff(int k) const noexcept
    {
        return k >= 0 && k < static_cast<int>(coeffs_.size()) ? coeffs_[static_cast<std::size_t>(k)] : 0.0;
    }

    friend bool operator==(const TruncatedSeries &, const TruncatedSeries &) = default;

private:
    double center_;
    std::vector<double> coeffs_;
};

// Horner evaluation, highest coefficient first.
double eval(const TruncatedSeries &s, double t) noexcept;

// Pads with zeros or drops high-order terms so the result has the given order.
TruncatedSeries truncate(const TruncatedSeries &s, int order);
// Same coefficients reinterpreted about another center.
TruncatedSeries recenter(const TruncatedSeries &s, double center);

TruncatedSeries add(const TruncatedSeries &a, const TruncatedSeries &b);
TruncatedSeries sub(const TruncatedSeries &a, const TruncatedSeries &b);
TruncatedSeries scale(const TruncatedSeries &s, double factor);

// Cauchy product truncated at order.
TruncatedSeries mul(const TruncatedSeries &a, const TruncatedSeries &b, int order);

// Direct q-fold product sum (nested index sums) over any number of factors.
// Used to cross-check left-folded binary products.
TruncatedSeries product_nfold(std::span<const TruncatedSeries> factors, int order);

// p-th derivative; coefficient k becomes (k+p)!/k! * c_{k+p}.
TruncatedSeries derivative(const TruncatedSeries &s, int p);

// Leading-coefficient floor used by div: 1e-12 * max(1, |num_0|).
double division_floor(double numerator_leading) noexcept;

// q with den * q == num up to order.
TruncatedSeries div(const TruncatedSeries &num, const TruncatedSeries &den, int order);

// exp of a series: E_0 = exp(g_0), E_k = (1/k) sum_{l=1}^{k} l g_l E_{k-l}.
TruncatedSeries exp_series(const TruncatedSeries &g, int order);

// Re-expansion about new_center by repeated synthetic division.
TruncatedSeries taylor_shift(const TruncatedSeries &s, double new_center);
// The same re-expansion through the explicit binomial double sum.
TruncatedSeries taylor_shift_binomial(const TruncatedSeries &s, double new_center);

// Series about target_center of t -> source^(p)(t - tau), truncated at order.
// When target_center - tau lands exactly on source.center() the shift is skipped.
TruncatedSeries delayed_term_series(const TruncatedSeries &source, int p, double tau, double target_center, int order);

// Exact-alignment case: the delayed argument's expansion point coincides with
// the source center, so the coefficients are (k+p)!/k! * c_{k+p} directly.
TruncatedSeries aligned_delayed_term_series(const TruncatedSeries &source, int p, double target_center, int order);

// (k+1)(k+2)...(k+p) as a double.
double falling_ratio(int k, int p) noexcept;

} // namespace ddedtm

#endif

#include <ddedtm/schedule.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>

#include <ddedtm/error.hpp>

namespace ddedtm
{

SegmentSchedule::SegmentSchedule(ScheduleMode mode, double t0, double T, std::vector<double> grid,
                                 std::vector<double> delays, std::vector<std::vector<SourceRef>> sources,
                                 double epsilon, std::optional<Rational> unit)
    : mode_(mode), t0_(t0), T_(T), grid_(std::move(grid)), delays_(std::move(delays)), sources_(std::move(sources)),
      epsilon_(epsilon), unit_(std::move(unit))
{
}

std::pair<double, double> SegmentSchedule::interval(int segment) const
{
    if (segment < 1 || segment > segment_count()) {
        throw std::out_of_range("segment index out of range");
    }
    const auto j = static_cast<std::size_t>(segment);
    return {grid_[j - 1], j < grid_.size() ? grid_[j] : T_};
}

const SourceRef &SegmentSchedule::source(int segment, int delay) const
{
    if (segment < 1 || segment > segment_count() || delay < 1 || delay > static_cast<int>(delays_.size())) {
        throw std::out_of_range("source lookup out of range");
    }
    return sources_[static_cast<std::size_t>(segment - 1)][static_cast<std::size_t>(delay - 1)];
}

double dedupe_epsilon(double t0, double T) noexcept
{
    return 1e-9 * std::max(1.0, std::abs(T - t0));
}

namespace
{

void require_horizon(double t0, double T)
{
    if (!(T > t0)) {
        throw Error(ErrorCode::InvalidModel, "T must be greater than t0");
    }
}

[[noreturn]] void too_many(std::size_t cap)
{
    throw Error(ErrorCode::TooManySegments, "the segment grid exceeds the cap of " + std::to_string(cap) + " segments");
}

} // namespace

SegmentSchedule build_commensurate(double t0, double T, std::span<const Rational> delays, std::size_t cap)
{
    require_horizon(t0, T);
    const double eps = dedupe_epsilon(t0, T);
    std::vector<double> tau;
    for (const auto &d : delays) {
        tau.push_back(d.to_double());
    }
    if (delays.empty()) {
        return {ScheduleMode::Commensurate, t0, T, {t0}, {}, {{}}, eps, std::nullopt};
    }
    const Rational unit = rational_gcd(delays);
    const double width = unit.to_double();

    // K with T in (t0 + K alpha, t0 + (K+1) alpha]; a ratio within rounding of an
    // integer m puts T on the grid point t0 + m alpha.
    const double ratio = (T - t0) / width;
    const double nearest = std::round(ratio);
    const double last = std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio) ? nearest - 1.0 : std::ceil(ratio) - 1.0;
    if (last + 1.0 > static_cast<double>(cap)) {
        too_many(cap);
    }
    const auto K = static_cast<std::int64_t>(std::max(0.0, last));

    std::vector<std::int64_t> steps;
    for (const auto &d : delays) {
        steps.push_back((d / unit).num());
    }
    std::vector<double> grid;
    std::vector<std::vector<SourceRef>> sources;
    for (std::int64_t j = 0; j <= K; ++j) {
        const Rational offset = Rational(j) * unit;
        grid.push_back(t0 + static_cast<double>(offset.num()) / static_cast<double>(offset.den()));
        std::vector<SourceRef> row;
        for (const auto k : steps) {
            const std::int64_t l = j + 1 - k;
            row.push_back({l >= 1 ? static_cast<int>(l) : kHistory, 0.0, true});
        }
        sources.push_back(std::move(row));
    }
    return {ScheduleMode::Commensurate, t0, T, std::move(grid), std::move(tau), std::move(sources), eps, unit};
}

SegmentSchedule build_sigma_grid(double t0, double T, std::span<const double> delays, std::size_t cap)
{
    require_horizon(t0, T);
    const double eps = dedupe_epsilon(t0, T);
    std::vector<double> tau(delays.begin(), delays.end());
    for (const double d : tau) {
        if (!(d > 0.0)) {
            throw Error(ErrorCode::InvalidModel, "delays must be positive");
        }
    }

    // Smallest-first expansion of {t0 + sum K_i tau_i}: every accepted point
    // pushes its r successors, popped values within eps of the last accepted one
    // are duplicates.
    std::priority_queue<double, std::vector<double>, std::greater<>> frontier;
    frontier.push(t0);
    std::vector<double> grid;
    while (!frontier.empty()) {
        const double v = frontier.top();
        frontier.pop();
        if (!grid.empty() && v - grid.back() <= eps) {
            continue;
        }
        grid.push_back(v);
        if (grid.size() > cap) {
            too_many(cap);
        }
        for (const double d : tau) {
            if (v + d < T - eps) {
                frontier.push(v + d);
            }
        }
    }

    SegmentSchedule partial(ScheduleMode::NonCommensurate, t0, T, grid, tau, {}, eps, std::nullopt);
    std::vector<std::vector<SourceRef>> sources;
    for (int j = 1; j <= partial.segment_count(); ++j) {
        const auto [a, b] = partial.interval(j);
        std::vector<SourceRef> row;
        for (const double d : tau) {
            const int l = locate(partial, 0.5 * (a + b) - d);
            SourceRef ref{l, 0.0, false};
            bool single = false;
            if (l == kHistory) {
                single = b - d <= t0 + eps;
            } else {
                const auto [lo, hi] = partial.interval(l);
                single = a - d >= lo - eps && b - d <= hi + eps;
                ref.shift = a - d - lo;
            }
            if (!single) {
                throw std::logic_error("segment " + std::to_string(j) + " reads from more than one source interval");
            }
            row.push_back(ref);
        }
        sources.push_back(std::move(row));
    }
    return {ScheduleMode::NonCommensurate, t0, T, std::move(grid), std::move(tau), std::move(sources), eps,
            std::nullopt};
}

int locate(const SegmentSchedule &schedule, double t)
{
    const double eps = schedule.epsilon();
    const auto &delays = schedule.delays();
    const double earliest = schedule.t0() - (delays.empty() ? 0.0 : *std::max_element(delays.begin(), delays.end()));
    if (!(t >= earliest - eps) || !(t <= schedule.horizon() + eps)) {
        throw Error(ErrorCode::OutOfDomain, "t = " + std::to_string(t) + " is outside ["
                                                + std::to_string(earliest) + ", "
                                                + std::to_string(schedule.horizon()) + "]");
    }
    if (t <= schedule.t0() + eps) {
        return kHistory;
    }
    const auto &grid = schedule.grid();
    const auto it = std::lower_bound(grid.begin() + 1, grid.end(), t - eps);
    return static_cast<int>(it - grid.begin());
}

ScheduleBuild build_schedule(const DelayModel &m, std::size_t cap)
{
    std::vector<std::string> warnings;
    if (m.delays.empty() || m.all_delays_exact()) {
        std::vector<Rational> exact;
        for (const auto &d : m.delays) {
            exact.push_back(*d.exact);
        }
        return {build_commensurate(m.t0, m.T, exact, cap), std::move(warnings)};
    }
    std::vector<double> tau;
    for (const auto &d : m.delays) {
        tau.push_back(d.value);
    }
    if (tau.size() >= 2) {
        bool looks_rational = true;
        for (std::size_t i = 0; i < tau.size() && looks_rational; ++i) {
            for (std::size_t j = i + 1; j < tau.size() && looks_rational; ++j) {
                const double ratio = tau[i] / tau[j];
                bool found = false;
                for (int q = 1; q <= 64 && !found; ++q) {
                    found = std::abs(ratio - std::round(ratio * q) / q) <= 1e-12;
                }
                looks_rational = found;
            }
        }
        if (looks_rational) {
            warnings.emplace_back("floating-point delays have rational ratios; write them as fractions (p/q) to use "
                                  "the exact commensurate grid");
        }
    }
    return {build_sigma_grid(m.t0, m.T, tau, cap), std::move(warnings)};
}

} // namespace ddedtm

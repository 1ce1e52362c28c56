#ifndef DDEDTM_SCHEDULE_HPP
#define DDEDTM_SCHEDULE_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <ddedtm/model.hpp>
#include <ddedtm/rational.hpp>

namespace ddedtm
{

inline constexpr std::size_t kDefaultSegmentCap = 10000;
// Segment index standing for the history interval [t0 - max tau, t0].
inline constexpr int kHistory = 0;

enum class ScheduleMode { Commensurate, NonCommensurate };

// Where segment j reads delayed term i from.
struct SourceRef {
    int segment = kHistory;
    // sigma_{j-1} - tau_i - sigma_{l-1}; for the history it is unused.
    double shift = 0.0;
    // The shift is known to be exactly zero (commensurate grid).
    bool aligned = false;
};

// Segment grid sigma_0 = t0 < sigma_1 < ... < sigma_K < T. Segment j (1-based)
// is the left-open interval (sigma_{j-1}, sigma_j], the last one (sigma_K, T].
class SegmentSchedule
{
public:
    SegmentSchedule(ScheduleMode mode, double t0, double T, std::vector<double> grid, std::vector<double> delays,
                    std::vector<std::vector<SourceRef>> sources, double epsilon, std::optional<Rational> unit);

    ScheduleMode mode() const noexcept { return mode_; }
    double t0() const noexcept { return t0_; }
    double horizon() const noexcept { return T_; }
    const std::vector<double> &grid() const noexcept { return grid_; }
    const std::vector<double> &delays() const noexcept { return delays_; }
    // Grid unit alpha_* of a commensurate schedule.
    const std::optional<Rational> &unit() const noexcept { return unit_; }
    double epsilon() const noexcept { return epsilon_; }

    int segment_count() const noexcept { return static_cast<int>(grid_.size()); }
    // K, the index of the last grid point.
    int last_grid_index() const noexcept { return static_cast<int>(grid_.size()) - 1; }
    std::pair<double, double> interval(int segment) const;
    const SourceRef &source(int segment, int delay) const;

private:
    ScheduleMode mode_;
    double t0_;
    double T_;
    std::vector<double> grid_;
    std::vector<double> delays_;
    std::vector<std::vector<SourceRef>> sources_;
    double epsilon_;
    std::optional<Rational> unit_;
};

// Merge tolerance for grid points: 1e-9 * max(1, |T - t0|).
double dedupe_epsilon(double t0, double T) noexcept;

SegmentSchedule build_commensurate(double t0, double T, std::span<const Rational> delays,
                                   std::size_t cap = kDefaultSegmentCap);

SegmentSchedule build_sigma_grid(double t0, double T, std::span<const double> delays,
                                 std::size_t cap = kDefaultSegmentCap);

// kHistory for t <= t0, else the segment containing t. Grid points within the
// tolerance belong to the segment they close.
int locate(const SegmentSchedule &schedule, double t);

struct ScheduleBuild {
    SegmentSchedule schedule;
    std::vector<std::string> warnings;
};

// Exact delays route to the commensurate grid, any floating delay to the sigma
// grid. A warning is emitted when floating delays look commensurate.
ScheduleBuild build_schedule(const DelayModel &m, std::size_t cap = kDefaultSegmentCap);

} // namespace ddedtm

#endif

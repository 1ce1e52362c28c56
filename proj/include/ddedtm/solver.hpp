#ifndef DDEDTM_SOLVER_HPP
#define DDEDTM_SOLVER_HPP

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <ddedtm/lowering.hpp>
#include <ddedtm/model.hpp>
#include <ddedtm/schedule.hpp>
#include <ddedtm/series.hpp>

namespace ddedtm
{

struct SolveOptions {
    std::size_t segment_cap = kDefaultSegmentCap;
    // Replaces the model's truncation orders with a uniform order.
    std::optional<int> order_override;
};

struct SolutionSegment {
    int index = 0;
    double left = 0.0;
    double right = 0.0;
    // Expanded about left.
    TruncatedSeries series;
    // U_j(0..n-1) used to start the recurrence.
    std::vector<double> seed;
    // Delayed-term series bound for this segment.
    KnownSlots slots;
    // Largest |residual_k| / max |coefficient| over the computed orders.
    double relative_residual = 0.0;
};

// u(t) assembled from per-segment Taylor polynomials plus the history.
class PiecewiseSolution
{
public:
    PiecewiseSolution(std::shared_ptr<const DelayModel> model, SegmentSchedule schedule, RecurrencePlan plan,
                      std::vector<SolutionSegment> segments, std::vector<std::string> warnings);

    const DelayModel &model() const noexcept { return *model_; }
    const SegmentSchedule &schedule() const noexcept { return schedule_; }
    const RecurrencePlan &plan() const noexcept { return plan_; }
    const std::vector<SolutionSegment> &segments() const noexcept { return segments_; }
    const SolutionSegment &segment(int index) const { return segments_.at(static_cast<std::size_t>(index - 1)); }
    const std::vector<std::string> &warnings() const noexcept { return warnings_; }

private:
    std::shared_ptr<const DelayModel> model_;
    SegmentSchedule schedule_;
    RecurrencePlan plan_;
    std::vector<SolutionSegment> segments_;
    std::vector<std::string> warnings_;
};

PiecewiseSolution solve(const DelayModel &m, const SolveOptions &options = {});

double eval_solution(const PiecewiseSolution &sol, double t);

// u^(p)(t): history derivative for t <= t0, segment derivative otherwise.
double eval_solution_derivative(const PiecewiseSolution &sol, double t, int p);

// Inclusive uniform samples t_start, t_start + step, ..., t_end.
std::vector<std::pair<double, double>> sample(const PiecewiseSolution &sol, double t_start, double t_end, double step);

// Uniform inclusive grid shared by the samplers; the last point is snapped to
// t_end when it lands within rounding of it.
std::vector<double> uniform_grid(double t_start, double t_end, double step);

} // namespace ddedtm

#endif

#include <ddedtm/solver.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include <ddedtm/error.hpp>

namespace ddedtm
{

PiecewiseSolution::PiecewiseSolution(std::shared_ptr<const DelayModel> model, SegmentSchedule schedule,
                                     RecurrencePlan plan, std::vector<SolutionSegment> segments,
                                     std::vector<std::string> warnings)
    : model_(std::move(model)), schedule_(std::move(schedule)), plan_(std::move(plan)), segments_(std::move(segments)),
      warnings_(std::move(warnings))
{
}

namespace
{

double relative_residual(const RecurrencePlan &plan, const KnownSlots &slots, const TruncatedSeries &u)
{
    const auto r = plan_residual(plan, slots, u);
    const int n = plan.equation_order();
    double scale = 0.0;
    for (const double c : u.coeffs()) {
        scale = std::max(scale, std::abs(c));
    }
    for (int k = 0; k + n <= u.order(); ++k) {
        scale = std::max(scale, std::abs(falling_ratio(k, n) * u.coeff(k + n)));
    }
    double worst = 0.0;
    for (const double x : r) {
        worst = std::max(worst, std::abs(x));
    }
    return scale > 0.0 ? worst / scale : worst;
}

KnownSlots bind_slots(const DelayModel &m, const RecurrencePlan &plan, const SegmentSchedule &schedule,
                      const std::vector<SolutionSegment> &done, int j, int order, std::vector<std::string> &warnings)
{
    const double left = schedule.interval(j).first;
    const int n = m.order;
    KnownSlots slots;
    for (const auto &key : plan.slots()) {
        const auto &src = schedule.source(j, key.delay);
        const double tau = m.delays[static_cast<std::size_t>(key.delay - 1)].value;
        if (src.segment == kHistory) {
            const auto phi = expand_series(*m.history, left - tau, order + key.deriv);
            slots.emplace(key, recenter(derivative(phi, key.deriv), left));
            continue;
        }
        const auto &source = done[static_cast<std::size_t>(src.segment - 1)].series;
        if (source.order() - key.deriv < order - n) {
            warnings.push_back("segment " + std::to_string(j) + ": delayed term u"
                               + std::string(static_cast<std::size_t>(key.deriv), '\'') + "["
                               + std::to_string(key.delay) + "] from segment " + std::to_string(src.segment)
                               + " has order " + std::to_string(source.order() - key.deriv)
                               + ", below the " + std::to_string(order - n) + " the recurrence uses; padded with zeros");
        }
        slots.emplace(key, src.aligned ? aligned_delayed_term_series(source, key.deriv, left, order)
                                       : delayed_term_series(source, key.deriv, tau, left, order));
    }
    return slots;
}

std::vector<double> first_seed(const DelayModel &m)
{
    std::vector<double> seed;
    if (m.initial_values) {
        double factorial = 1.0;
        for (int i = 0; i < m.order; ++i) {
            if (i > 0) {
                factorial *= i;
            }
            seed.push_back((*m.initial_values)[static_cast<std::size_t>(i)] / factorial);
        }
        return seed;
    }
    const auto phi = expand_series(*m.history, m.t0, m.order - 1);
    return {phi.coeffs().begin(), phi.coeffs().end()};
}

} // namespace

PiecewiseSolution solve(const DelayModel &input, const SolveOptions &options)
{
    auto model = std::make_shared<DelayModel>(input);
    if (options.order_override) {
        model->truncation = TruncationOrders::uniform(*options.order_override);
    }
    check_model(*model);
    auto plan = compile_rhs(*model);
    auto [schedule, warnings] = build_schedule(*model, options.segment_cap);

    const int n = model->order;
    std::vector<SolutionSegment> segments;
    for (int j = 1; j <= schedule.segment_count(); ++j) {
        const auto [left, right] = schedule.interval(j);
        const int order = model->truncation.at(j);
        try {
            auto slots = bind_slots(*model, plan, schedule, segments, j, order, warnings);
            std::vector<double> seed;
            if (j == 1) {
                seed = first_seed(*model);
            } else {
                const auto at_junction = taylor_shift(segments.back().series, left);
                for (int i = 0; i < n; ++i) {
                    seed.push_back(at_junction.coeff(i));
                }
            }
            auto series = run_plan(plan, slots, seed, order, left);
            const double residual = relative_residual(plan, slots, series);
            segments.push_back({j, left, right, std::move(series), std::move(seed), std::move(slots), residual});
        } catch (const Error &e) {
            throw e.in_segment(j);
        }
    }
    return {std::move(model), std::move(schedule), std::move(plan), std::move(segments), std::move(warnings)};
}

double eval_solution(const PiecewiseSolution &sol, double t)
{
    return eval_solution_derivative(sol, t, 0);
}

double eval_solution_derivative(const PiecewiseSolution &sol, double t, int p)
{
    const int j = locate(sol.schedule(), t);
    if (j == kHistory) {
        ExprPtr phi = sol.model().history;
        for (int i = 0; i < p; ++i) {
            phi = differentiate(*phi);
        }
        return evaluate(*phi, t);
    }
    const auto &s = sol.segment(j).series;
    if (p > s.order()) {
        return 0.0;
    }
    return eval(p == 0 ? s : derivative(s, p), t);
}

std::vector<double> uniform_grid(double t_start, double t_end, double step)
{
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw std::invalid_argument("sample step must be positive");
    }
    if (!(t_start <= t_end)) {
        throw Error(ErrorCode::OutOfDomain, "sample range is empty (t_start > t_end)");
    }
    const auto count = static_cast<long long>(std::floor((t_end - t_start) / step + 1e-9));
    std::vector<double> ts;
    ts.reserve(static_cast<std::size_t>(count) + 1);
    for (long long i = 0; i <= count; ++i) {
        double t = t_start + static_cast<double>(i) * step;
        if (i == count && std::abs(t - t_end) <= 1e-9 * step) {
            t = t_end;
        }
        ts.push_back(std::min(t, t_end));
    }
    return ts;
}

std::vector<std::pair<double, double>> sample(const PiecewiseSolution &sol, double t_start, double t_end, double step)
{
    std::vector<std::pair<double, double>> out;
    for (const double t : uniform_grid(t_start, t_end, step)) {
        out.emplace_back(t, eval_solution(sol, t));
    }
    return out;
}

} // namespace ddedtm

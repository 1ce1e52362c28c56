#ifndef DDEDTM_ORACLE_HPP
#define DDEDTM_ORACLE_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include <ddedtm/model.hpp>
#include <ddedtm/solver.hpp>

namespace ddedtm
{

// Fixed-step trajectory of the state (u, u', ..., u^(n-1)) with cubic Hermite
// interpolation between nodes. Node i sits at t0 + i*h; the last node is the
// horizon.
class DenseTrajectory
{
public:
    DenseTrajectory(double t0, double h, int dimension, std::vector<double> values, std::vector<double> slopes);

    // Samples f and its derivative df on the uniform grid.
    static DenseTrajectory tabulate(const std::function<double(double)> &f, const std::function<double(double)> &df,
                                    double t0, double T, double h);

    double t0() const noexcept { return t0_; }
    double step() const noexcept { return h_; }
    int dimension() const noexcept { return dim_; }
    std::size_t node_count() const noexcept { return values_.size() / static_cast<std::size_t>(dim_); }
    double node_time(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * h_; }
    double end() const noexcept { return node_time(node_count() - 1); }

    double node_value(std::size_t i, int component = 0) const;
    double node_slope(std::size_t i, int component = 0) const;

    // Hermite interpolant of a component and its derivative.
    double value(double t, int component = 0) const;
    double slope(double t, int component = 0) const;

private:
    double t0_;
    double h_;
    int dim_;
    std::vector<double> values_;
    std::vector<double> slopes_;
};

// Classical RK4 method of steps. Delayed arguments come from the history (at or
// before t0) or from the Hermite interpolant; u^(n)(t - tau) uses the
// interpolant's derivative. The step is shrunk to divide [t0, T] evenly.
DenseTrajectory rk_solve(const DelayModel &m, double h);

struct ComparisonRow {
    double t = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_diff = 0.0;
};

struct ComparisonReport {
    double max_abs_diff = 0.0;
    double argmax_t = 0.0;
    std::vector<ComparisonRow> rows;
};

ComparisonReport compare(const std::function<double(double)> &lhs, const std::function<double(double)> &rhs,
                         double t_start, double t_end, double step);

// DTM solution against a trajectory over [t0, T].
ComparisonReport compare(const PiecewiseSolution &sol, const DenseTrajectory &traj, double step);

} // namespace ddedtm

#endif

#include <ddedtm/cli.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include <ddedtm/error.hpp>
#include <ddedtm/model.hpp>
#include <ddedtm/oracle.hpp>

namespace ddedtm::cli
{

std::string format_number(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return {buf, res.ptr};
}

nlohmann::json coefficient_dump(const PiecewiseSolution &sol)
{
    const auto &m = sol.model();
    const auto &sch = sol.schedule();
    nlohmann::json delays = nlohmann::json::array();
    for (const auto &d : m.delays) {
        delays.push_back(d.exact ? nlohmann::json(d.exact->str()) : nlohmann::json(d.value));
    }
    nlohmann::json schedule{
        {"mode", sch.mode() == ScheduleMode::Commensurate ? "commensurate" : "noncommensurate"},
        {"grid", sch.grid()},
        {"horizon", sch.horizon()},
    };
    if (sch.unit()) {
        schedule["unit"] = sch.unit()->str();
    }
    nlohmann::json segments = nlohmann::json::array();
    for (const auto &s : sol.segments()) {
        segments.push_back({
            {"index", s.index},
            {"center", s.series.center()},
            {"interval", {s.left, s.right}},
            {"order", s.series.order()},
            {"seed", s.seed},
            {"coefficients", std::vector<double>(s.series.coeffs().begin(), s.series.coeffs().end())},
            {"relative_residual", s.relative_residual},
        });
    }
    return {
        {"model",
         {{"order", m.order},
          {"delays", delays},
          {"t0", m.t0},
          {"T", m.T},
          {"rhs", print_expr(*m.rhs)},
          {"history", print_expr(*m.history)}}},
        {"schedule", schedule},
        {"segments", segments},
    };
}

namespace
{

struct CommonOptions {
    std::string model_path;
    std::string out_path;
    std::optional<double> step;
    std::optional<int> order;
};

class InputFailure : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorCode code)
{
    switch (code) {
        case ErrorCode::NonFiniteCoefficient:
        case ErrorCode::NonFiniteState:
        case ErrorCode::DivisionBySmallLeadingCoefficient:
        case ErrorCode::OutOfDomain:
        case ErrorCode::CenterMismatch:
        case ErrorCode::OrderTooLow:
            return kSolverError;
        default:
            return kInputError;
    }
}

std::size_t segment_cap()
{
    if (const char *env = std::getenv("DDE_DTM_SEGMENT_CAP")) {
        std::size_t cap = 0;
        const std::string_view text(env);
        const auto res = std::from_chars(text.data(), text.data() + text.size(), cap);
        if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || cap == 0) {
            throw InputFailure("DDE_DTM_SEGMENT_CAP must be a positive integer");
        }
        return cap;
    }
    return kDefaultSegmentCap;
}

DelayModel load_model(const std::string &path, std::ostream &err)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputFailure("cannot read model file '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    auto m = parse_model(text.str());
    const auto report = validate_model(m);
    for (const auto &d : report.diagnostics) {
        err << (d.severity == Severity::Blocking ? "error: " : "warning: ") << d.code << ": " << d.message << '\n';
    }
    if (report.blocked()) {
        throw InputFailure("model rejected by validation");
    }
    return m;
}

// Writes to the file when a path is given, otherwise to out.
template <class Writer>
void emit(const std::string &path, std::ostream &out, Writer &&write)
{
    if (path.empty()) {
        write(out);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw InputFailure("cannot write '" + path + "'");
    }
    write(file);
}

void report_solution(const PiecewiseSolution &sol, std::ostream &err)
{
    err << "segments: " << sol.segments().size() << '\n';
    double worst = 0.0;
    for (const auto &s : sol.segments()) {
        err << "  segment " << s.index << " (" << format_number(s.left) << ", " << format_number(s.right)
            << "]: order " << s.series.order() << ", relative residual " << format_number(s.relative_residual)
            << '\n';
        worst = std::max(worst, s.relative_residual);
    }
    err << "max relative residual: " << format_number(worst) << '\n';
    for (const auto &w : sol.warnings()) {
        err << "warning: " << w << '\n';
    }
}

double default_step(const DelayModel &m)
{
    return (m.T - m.t0) / 100.0;
}

int cmd_solve(const CommonOptions &o, const std::string &dump_path, std::ostream &out, std::ostream &err)
{
    const auto m = load_model(o.model_path, err);
    const auto sol = solve(m, {segment_cap(), o.order});
    report_solution(sol, err);
    const auto rows = sample(sol, m.t0, m.T, o.step.value_or(default_step(m)));
    emit(o.out_path, out, [&](std::ostream &os) {
        os << "t,u\n";
        for (const auto &[t, u] : rows) {
            os << format_number(t) << ',' << format_number(u) << '\n';
        }
    });
    if (!dump_path.empty()) {
        emit(dump_path, out, [&](std::ostream &os) { os << coefficient_dump(sol).dump(2) << '\n'; });
    }
    return kOk;
}

int cmd_coeffs(const CommonOptions &o, std::ostream &out, std::ostream &err)
{
    const auto m = load_model(o.model_path, err);
    const auto sol = solve(m, {segment_cap(), o.order});
    report_solution(sol, err);
    emit(o.out_path, out, [&](std::ostream &os) { os << coefficient_dump(sol).dump(2) << '\n'; });
    return kOk;
}

int cmd_compare(const CommonOptions &o, double h, double tol, std::ostream &out, std::ostream &err)
{
    const auto m = load_model(o.model_path, err);
    const auto sol = solve(m, {segment_cap(), o.order});
    report_solution(sol, err);
    const auto traj = rk_solve(m, h);
    const auto report = compare(sol, traj, o.step.value_or(default_step(m)));
    emit(o.out_path, out, [&](std::ostream &os) {
        os << "t,u_dtm,u_rk,abs_diff\n";
        for (const auto &r : report.rows) {
            os << format_number(r.t) << ',' << format_number(r.lhs) << ',' << format_number(r.rhs) << ','
               << format_number(r.abs_diff) << '\n';
        }
    });
    err << "max_abs_diff: " << format_number(report.max_abs_diff) << " at t = " << format_number(report.argmax_t)
        << '\n';
    return report.max_abs_diff < tol ? kOk : kToleranceExceeded;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Delay differential equation solver: method of steps with Taylor-coefficient recurrences"};
    app.require_subcommand(1);

    CommonOptions solve_opts;
    std::string dump_path;
    auto *solve_cmd = app.add_subcommand("solve", "Solve a model and write t,u samples as CSV");
    solve_cmd->add_option("model", solve_opts.model_path, "Model file")->required();
    solve_cmd->add_option("--out", solve_opts.out_path, "Output CSV (default: standard output)");
    solve_cmd->add_option("--step", solve_opts.step, "Sample spacing (default: (T - t0) / 100)")
        ->check(CLI::PositiveNumber);
    solve_cmd->add_option("--order", solve_opts.order, "Uniform truncation order, overrides the model's N")
        ->check(CLI::PositiveNumber);
    solve_cmd->add_option("--dump-coeffs", dump_path, "Also write the per-segment coefficient dump (JSON)");

    CommonOptions coeff_opts;
    auto *coeffs_cmd = app.add_subcommand("coeffs", "Write per-segment Taylor coefficients as JSON");
    coeffs_cmd->add_option("model", coeff_opts.model_path, "Model file")->required();
    coeffs_cmd->add_option("--out", coeff_opts.out_path, "Output JSON (default: standard output)");
    coeffs_cmd->add_option("--order", coeff_opts.order, "Uniform truncation order, overrides the model's N")
        ->check(CLI::PositiveNumber);

    CommonOptions compare_opts;
    double h = 1e-3;
    double tol = 1e-3;
    auto *compare_cmd = app.add_subcommand("compare", "Compare the series solution against an RK4 reference");
    // --h is the RK4 step, so help is long-form only here.
    compare_cmd->set_help_flag("--help", "Print this help message and exit");
    compare_cmd->add_option("model", compare_opts.model_path, "Model file")->required();
    compare_cmd->add_option("--out", compare_opts.out_path, "Output CSV (default: standard output)");
    compare_cmd->add_option("--step", compare_opts.step, "Comparison grid spacing (default: (T - t0) / 100)")
        ->check(CLI::PositiveNumber);
    compare_cmd->add_option("--h", h, "RK4 step size")->check(CLI::PositiveNumber);
    compare_cmd->add_option("--tol", tol, "Maximum accepted absolute difference")->check(CLI::NonNegativeNumber);
    compare_cmd->add_option("--order", compare_opts.order, "Uniform truncation order, overrides the model's N")
        ->check(CLI::PositiveNumber);

    std::vector<const char *> argv;
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    try {
        if (solve_cmd->parsed()) {
            return cmd_solve(solve_opts, dump_path, out, err);
        }
        if (coeffs_cmd->parsed()) {
            return cmd_coeffs(coeff_opts, out, err);
        }
        return cmd_compare(compare_opts, h, tol, out, err);
    } catch (const Error &e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const InputFailure &e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kSolverError;
    }
}

} // namespace ddedtm::cli

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <locale>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <ddedtm/cli.hpp>

using namespace ddedtm;

namespace
{

const std::string models = DDEDTM_MODELS_DIR;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "dde_dtm");
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string write_temp(const std::string &name, const std::string &text)
{
    const auto path = std::filesystem::temp_directory_path() / ("ddedtm_" + name);
    std::ofstream(path) << text;
    return path.string();
}

std::vector<std::vector<double>> parse_csv(const std::string &text, std::string &header)
{
    std::istringstream in(text);
    std::getline(in, header);
    std::vector<std::vector<double>> rows;
    for (std::string line; std::getline(in, line);) {
        std::vector<double> row;
        std::istringstream cells(line);
        for (std::string cell; std::getline(cells, cell, ',');) {
            row.push_back(std::stod(cell));
        }
        rows.push_back(row);
    }
    return rows;
}

struct CommaDecimal : std::numpunct<char> {
    char do_decimal_point() const override { return ','; }
    char do_thousands_sep() const override { return '.'; }
    std::string do_grouping() const override { return "\3"; }
};

} // namespace

TEST_CASE("solve writes t,u samples")
{
    const auto r = run_cli({"solve", models + "/hutchinson.model", "--step", "0.05"});
    REQUIRE(r.code == cli::kOk);
    std::string header;
    const auto rows = parse_csv(r.out, header);
    CHECK(header == "t,u");
    REQUIRE(rows.size() == 11);
    CHECK(rows[0][0] == 0.0);
    CHECK(rows[0][1] == 1.0);
    CHECK(rows[10][0] == 0.5);
    CHECK(std::abs(rows[2][1] - 0.81867) <= 1.5e-5);
    CHECK(std::abs(rows[4][1] - 0.69614) <= 1.5e-5);
    CHECK(r.err.find("segments: 5") != std::string::npos);
    CHECK(r.err.find("max relative residual") != std::string::npos);

    const auto n = run_cli({"solve", models + "/neutral_gyori.model", "--step", "0.2"});
    REQUIRE(n.code == cli::kOk);
    const auto nrows = parse_csv(n.out, header);
    REQUIRE(nrows.size() == 11);
    const double table[] = {2.3000, 2.3488, 2.3987, 2.4496, 2.5015, 2.5546,
                            2.6253, 2.6980, 2.7727, 2.8494, 2.9283};
    for (std::size_t i = 0; i < 11; ++i) {
        CHECK(std::abs(nrows[i][1] - table[i]) <= 1.5e-4);
    }

    const auto dflt = run_cli({"solve", models + "/exponential.model"});
    CHECK(parse_csv(dflt.out, header).size() == 101);
}

TEST_CASE("solve writes files and the coefficient dump")
{
    const auto csv = (std::filesystem::temp_directory_path() / "ddedtm_out.csv").string();
    const auto json = (std::filesystem::temp_directory_path() / "ddedtm_dump.json").string();
    const auto r = run_cli({"solve", models + "/hutchinson.model", "--out", csv, "--dump-coeffs", json});
    REQUIRE(r.code == cli::kOk);
    CHECK(r.out.empty());
    std::ifstream in(json);
    const auto dump = nlohmann::json::parse(in);
    CHECK(dump["segments"].size() == 5);
    CHECK(dump["schedule"]["unit"] == "1/10");
    CHECK(std::filesystem::file_size(csv) > 0);
}

TEST_CASE("coeffs")
{
    auto r = run_cli({"coeffs", models + "/hutchinson.model"});
    REQUIRE(r.code == cli::kOk);
    auto dump = nlohmann::json::parse(r.out);
    const auto c1 = dump["segments"][0]["coefficients"].get<std::vector<double>>();
    REQUIRE(c1.size() == 4);
    CHECK(c1[0] == 1.0);
    CHECK(c1[1] == -2.0);
    CHECK(c1[2] == 2.0);
    CHECK(c1[3] == doctest::Approx(-1.3333333333333333));
    CHECK(dump["schedule"]["mode"] == "commensurate");
    CHECK(dump["model"]["rhs"] == "u * (2 - 4 * u[1])");

    r = run_cli({"coeffs", models + "/exponential.model"});
    dump = nlohmann::json::parse(r.out);
    REQUIRE(dump["segments"].size() == 1);
    const auto e = dump["segments"][0]["coefficients"].get<std::vector<double>>();
    double fact = 1.0;
    for (std::size_t k = 0; k < e.size(); ++k) {
        CHECK(e[k] == doctest::Approx(1.0 / fact).epsilon(1e-14));
        fact *= static_cast<double>(k + 1);
    }

    r = run_cli({"coeffs", models + "/neutral_gyori.model"});
    dump = nlohmann::json::parse(r.out);
    const auto c2 = dump["segments"][1]["coefficients"].get<std::vector<double>>();
    double expected = 2.3 * std::exp(0.105);
    for (std::size_t k = 0; k < c2.size(); ++k) {
        CHECK(c2[k] == doctest::Approx(expected).epsilon(1e-12));
        expected *= 0.1365 / static_cast<double>(k + 1);
    }

    r = run_cli({"coeffs", models + "/hutchinson.model", "--order", "9"});
    dump = nlohmann::json::parse(r.out);
    CHECK(dump["segments"][4]["order"] == 9);
}

TEST_CASE("compare")
{
    auto r = run_cli({"compare", models + "/hutchinson.model", "--h", "1e-3", "--step", "0.05", "--order", "16"});
    CHECK(r.code == cli::kOk);
    CHECK(r.out.rfind("t,u_dtm,u_rk,abs_diff\n", 0) == 0);
    CHECK(r.err.find("max_abs_diff: ") != std::string::npos);

    r = run_cli({"compare", models + "/hutchinson.model", "--tol", "0"});
    CHECK(r.code == cli::kToleranceExceeded);

    r = run_cli({"compare", models + "/two_delay_noncommensurate.model", "--tol", "1e-3"});
    CHECK(r.code == cli::kOk);
    CHECK(r.err.find("segments: 6") != std::string::npos);

    r = run_cli({"compare", models + "/hutchinson.model", "--h", "0.5"});
    CHECK(r.code == cli::kInputError);
    CHECK(r.err.find("StepTooLarge") != std::string::npos);
}

TEST_CASE("input errors exit with 1")
{
    const auto bad_horizon = write_temp("horizon.model", "rhs = \"u\"\nhistory = \"1\"\nt0 = 1\nT = 1\n");
    auto r = run_cli({"solve", bad_horizon});
    CHECK(r.code == cli::kInputError);
    CHECK(r.err.find("T must be greater than t0") != std::string::npos);

    r = run_cli({"solve", "/nonexistent/model"});
    CHECK(r.code == cli::kInputError);

    r = run_cli({"solve", models + "/hutchinson.model", "--bogus"});
    CHECK(r.code == cli::kInputError);

    r = run_cli({});
    CHECK(r.code == cli::kInputError);

    const auto blocked = write_temp("blocked.model", "delays = [1]\nrhs = \"1/u + u[1]\"\nhistory = \"1\"\nT = 1\n");
    r = run_cli({"solve", blocked});
    CHECK(r.code == cli::kInputError);
    CHECK(r.err.find("UnsupportedCurrentStateDenominator") != std::string::npos);

    const auto syntax = write_temp("syntax.model", "rhs = \"u *\"\nhistory = \"1\"\nT = 1\n");
    r = run_cli({"coeffs", syntax});
    CHECK(r.code == cli::kInputError);
    CHECK(r.err.find("SyntaxError") != std::string::npos);

    const auto unused = write_temp("unused.model", "delays = [1, 2]\nrhs = \"u[1]\"\nhistory = \"1\"\nT = 1\n");
    r = run_cli({"solve", unused});
    CHECK(r.code == cli::kOk);
    CHECK(r.err.find("warning: UnusedDelay") != std::string::npos);
}

TEST_CASE("solver errors exit with 2")
{
    const auto blowup = write_temp("blowup.model", "rhs = \"u^2\"\nhistory = \"1e40\"\nT = 1\n");
    const auto r = run_cli({"solve", blowup});
    CHECK(r.code == cli::kSolverError);
    CHECK(r.err.find("NonFiniteCoefficient") != std::string::npos);
}

TEST_CASE("segment cap from the environment")
{
    setenv("DDE_DTM_SEGMENT_CAP", "3", 1);
    auto r = run_cli({"solve", models + "/hutchinson.model"});
    CHECK(r.code == cli::kInputError);
    CHECK(r.err.find("TooManySegments") != std::string::npos);
    setenv("DDE_DTM_SEGMENT_CAP", "zero", 1);
    r = run_cli({"solve", models + "/hutchinson.model"});
    CHECK(r.code == cli::kInputError);
    unsetenv("DDE_DTM_SEGMENT_CAP");
}

TEST_CASE("output is byte-identical across runs and locales")
{
    const std::vector<std::string> args{"compare", models + "/logistic_pi_third.model", "--step", "0.1"};
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    CHECK(a.out == b.out);
    CHECK(a.err == b.err);

    const auto previous = std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
    const auto c = run_cli(args);
    const auto d = run_cli({"coeffs", models + "/hutchinson.model"});
    std::locale::global(previous);
    CHECK(c.out == a.out);
    CHECK(c.out.find("\n0.5,") != std::string::npos);
    CHECK(d.out == run_cli({"coeffs", models + "/hutchinson.model"}).out);
}

TEST_CASE("format_number")
{
    CHECK(cli::format_number(0.1) == "0.10000000000000001");
    CHECK(cli::format_number(1.0) == "1");
    CHECK(cli::format_number(-2.5e-7) == "-2.4999999999999999e-07");
}

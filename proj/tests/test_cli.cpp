#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli_runner.hpp"
#include "martinet/grid.hpp"

namespace fs = std::filesystem;
using martinet::testing::run_cli;
using martinet::testing::slurp;

namespace {

const std::string kCli = MARTINET_CLI_PATH;

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        root_ = fs::path(::testing::TempDir()) / ("martinet_cli_" + std::string(info->name()));
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    void TearDown() override { fs::remove_all(root_); }

    /// Runs with --out <root>/<name> and logs in <root>/<name>.log.
    martinet::testing::CliRun run(const std::string& name, std::vector<std::string> args) {
        args.push_back("--out");
        args.push_back((root_ / name).string());
        return run_cli(kCli, args, root_ / (name + ".log"));
    }

    nlohmann::json summary(const std::string& name) { return nlohmann::json::parse(slurp(root_ / name / "summary.json")); }

    fs::path root_;
};

}  // namespace

TEST_F(Cli, SolveWithZeroDatumWritesZeroGrid) {
    const auto r = run("zero", {"solve", "--set", "domain.h=0.25", "--set", "boundary.g=0"});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const auto u = martinet::read_grid_csv((root_ / "zero" / "solution.csv").string());
    EXPECT_EQ(u.counts(), (std::array<int, 3>{9, 9, 9}));
    for (double v : u.values()) EXPECT_EQ(v, 0.0);
    EXPECT_NE(r.out.find("solve:"), std::string::npos);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
}

TEST_F(Cli, SolvedGridRoundTrips) {
    const auto r = run("rt", {"solve", "--set", "domain.h=0.25", "--set", "boundary.g=x1 + 0.3*x2*x3 - abs(x3)"});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const auto path = root_ / "rt" / "solution.csv";
    const auto u = martinet::read_grid_csv(path.string());
    std::ostringstream again;
    martinet::write_grid_csv(again, u);
    EXPECT_EQ(again.str(), slurp(path));
    std::istringstream in(again.str());
    EXPECT_EQ(martinet::read_grid_csv(in), u);
}

TEST_F(Cli, SummaryEchoesEffectiveConfig) {
    const auto ini = root_ / "run.ini";
    std::ofstream(ini) << "; sample\n[profile]\ncoeffs = 0 0 0.5\n[domain]\nh = 0.25\n[solver]\ntol = 1e-7\n";
    const auto r = run("ini", {"solve", "--config", ini.string(), "--set", "solver.directions=16"});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const auto s = summary("ini");
    EXPECT_EQ(s["command"], "solve");
    EXPECT_EQ(s["config"]["profile.coeffs"], "0 0 0.5");
    EXPECT_EQ(s["config"]["solver.tol"], "1e-7");
    EXPECT_EQ(s["config"]["solver.directions"], "16");
    EXPECT_EQ(s["config"]["domain.lower"], "-1 -1 -1");
    EXPECT_TRUE(s["converged"].get<bool>());
}

TEST_F(Cli, TwistCheckMeetsTolerance) {
    const auto r = run("twist", {"twist-check", "--set", "twist.samples=1000"});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const auto s = summary("twist");
    EXPECT_EQ(s["samples"], 1000);
    EXPECT_LE(s["max_relative_error"].get<double>(), 1e-12);
}

TEST_F(Cli, DistanceExponentForQuadraticProfile) {
    const auto r = run("dist", {"distance", "--set", "profile.coeffs=0 0 0.5", "--set", "distance.axis=3", "--set",
                                "distance.deltas=0.001 0.003 0.01 0.03 0.1"});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const double slope = summary("dist")["slope"].get<double>();
    EXPECT_GE(slope, 0.283);
    EXPECT_LE(slope, 0.383);
    const auto csv = slurp(root_ / "dist" / "distance.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "delta,length,ball_box");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}

TEST_F(Cli, MonotoneRecoversManufacturedSolution) {
    const auto r = run("mono", {"monotone", "--set", "domain.h=0.125", "--set", "boundary.g=x1^2", "--set",
                                "monotone.rhs=x1^2 - 2", "--set", "monotone.exact=x1^2"});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_LE(summary("mono")["sup_error"].get<double>(), 1e-5);
}

TEST_F(Cli, MaxprinWritesPerTauRecords) {
    const auto r = run("mp", {"maxprin", "--set", "maxprin.taus=10 100 1000", "--set", "search.grid_n=12"});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    std::istringstream lines(slurp(root_ / "mp" / "penalty.jsonl"));
    std::string line;
    int n = 0;
    double prev = 1e300;
    while (std::getline(lines, line)) {
        const auto rec = nlohmann::json::parse(line);
        EXPECT_LE(rec["m"].get<double>(), prev);
        prev = rec["m"].get<double>();
        ++n;
    }
    EXPECT_EQ(n, 3);
    EXPECT_GE(summary("mp")["vector_gap_slope"].get<double>(), 1.9);
}

TEST_F(Cli, ImpReportsSliceOrdering) {
    const auto r = run("imp", {"imp", "--set", "imp.u=x1*x2 - x3^2", "--set", "imp.v=x1*x2 - x3^2 - 0.1", "--set",
                               "search.grid_n=8", "--set", "imp.tau_end=10"});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const auto s = summary("imp");
    EXPECT_LE(s["m_23"].get<double>(), s["m"].get<double>() + 1e-12);
    EXPECT_LE(s["m_3"].get<double>(), s["m_23"].get<double>() + 1e-12);
    EXPECT_GE(s["m_3"].get<double>(), 0.1 - 1e-12);
}

TEST_F(Cli, CompareOrderedData) {
    const auto r = run("cmp", {"compare", "--set", "domain.h=0.125", "--set", "compare.g1=x1 - 0.2", "--set",
                               "compare.g2=max(x1, x2)"});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_LE(summary("cmp")["max_violation"].get<double>(), 2e-6);
    EXPECT_TRUE(fs::exists(root_ / "cmp" / "u1.csv"));
    EXPECT_TRUE(fs::exists(root_ / "cmp" / "u2.csv"));
}

TEST_F(Cli, OperatorsMatchKnownValues) {
    const auto r = run("ops", {"operators", "--set", "operators.u=x1^2", "--set", "operators.points=1 0 0; 0 0 0",
                               "--set", "operators.q=2 3 4"});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    std::istringstream lines(slurp(root_ / "ops" / "operators.jsonl"));
    std::string line;
    std::getline(lines, line);
    auto rec = nlohmann::json::parse(line);
    EXPECT_EQ(rec["inf_laplacian"], 8.0);
    EXPECT_EQ(rec["q_laplacian"][0]["value"], 2.0);
    EXPECT_EQ(rec["q_laplacian"][2]["value"], 24.0);
    std::getline(lines, line);
    rec = nlohmann::json::parse(line);
    EXPECT_TRUE(rec["q_laplacian"][1]["value"].is_null());
    EXPECT_EQ(rec["jensen_f"], -0.010000000000000002);
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run("a", {"solve", "--set", "solver.bogus=1"}).exit_code, 1);
    EXPECT_EQ(run("b", {"solve", "--config", (root_ / "missing.ini").string()}).exit_code, 1);
    EXPECT_EQ(run("c", {"solve", "--set", "boundary.g=x1 +* 2"}).exit_code, 1);
    EXPECT_EQ(run("d", {"solve", "--set", "domain.h=0.3"}).exit_code, 1);
    EXPECT_EQ(run("e", {"solve", "--set", "solver.directions=7"}).exit_code, 1);
    EXPECT_EQ(run("f", {"distance", "--set", "distance.deltas=0.01 0.02 0.03 0.04"}).exit_code, 1);
    EXPECT_EQ(run("g", {"imp", "--set", "imp.orders=112"}).exit_code, 1);
    EXPECT_EQ(run("h", {"frobnicate"}).exit_code, 1);
    EXPECT_EQ(run_cli(kCli, {}, root_ / "i.log").exit_code, 1);

    const auto unknown = run("j", {"solve", "--set", "solver.bogus=1"});
    EXPECT_NE(unknown.err.find("solver.bogus"), std::string::npos);

    const auto ini = root_ / "bad.ini";
    std::ofstream(ini) << "[solver]\ntolerance = 1e-6\n";
    EXPECT_EQ(run("k", {"solve", "--config", ini.string()}).exit_code, 1);

    const auto nc = run("l", {"solve", "--set", "domain.h=0.25", "--set", "boundary.g=x1^2", "--set",
                              "solver.max_iters=2"});
    EXPECT_EQ(nc.exit_code, 2);
    EXPECT_NE(nc.err.find("no convergence"), std::string::npos);
    EXPECT_EQ(run("m", {"solve", "--help"}).exit_code, 0);
}

TEST_F(Cli, EveryCommandIsDeterministic) {
    for (const auto& c : martinet::testing::cli_cases()) {
        const auto a = run(c.name + "_a", c.args);
        const auto b = run(c.name + "_b", c.args);
        ASSERT_EQ(a.exit_code, 0) << c.name << ": " << a.err;
        ASSERT_EQ(b.exit_code, 0) << c.name << ": " << b.err;
        const auto fa = martinet::testing::directory_contents(root_ / (c.name + "_a"));
        const auto fb = martinet::testing::directory_contents(root_ / (c.name + "_b"));
        EXPECT_FALSE(fa.empty()) << c.name;
        EXPECT_EQ(fa, fb) << c.name;
    }
}

TEST_F(Cli, ThreadCountDoesNotChangeOutput) {
    for (const auto& c : martinet::testing::cli_cases()) {
        if (c.name != "solve" && c.name != "maxprin") continue;
        auto threaded = c.args;
        threaded.insert(threaded.end(), {"--threads", "4"});
        ASSERT_EQ(run(c.name + "_1", c.args).exit_code, 0);
        ASSERT_EQ(run(c.name + "_4", threaded).exit_code, 0);
        EXPECT_EQ(martinet::testing::directory_contents(root_ / (c.name + "_1")),
                  martinet::testing::directory_contents(root_ / (c.name + "_4")))
            << c.name;
    }
}

TEST_F(Cli, ShippedConfigsRun) {
    int count = 0;
    for (const auto& e : fs::directory_iterator(MARTINET_CONFIG_DIR)) {
        if (e.path().extension() != ".ini") continue;
        const std::string command = e.path().stem().string();
        const auto r = run(command, {command, "--config", e.path().string()});
        EXPECT_EQ(r.exit_code, 0) << command << ": " << r.err;
        EXPECT_TRUE(fs::exists(root_ / command / "summary.json")) << command;
        ++count;
    }
    EXPECT_EQ(count, 8);
}

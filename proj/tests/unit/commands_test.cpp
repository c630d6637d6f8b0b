#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <meboost/commands.hpp>
#include <meboost/csv.hpp>
#include <meboost/quad_lasso.hpp>
#include <meboost/report.hpp>

#include "oracles.hpp"

using namespace meboost;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir()
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() / fmt_name(info->test_suite_name(), info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    static std::string fmt_name(const char* suite, const char* name)
    {
        return std::string("meboost_") + suite + "_" + name + "_" + std::to_string(::getpid());
    }
    fs::path path_;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Linear data with three active predictors, written with a header.
void write_linear_csv(const fs::path& file, Index n, Index p, std::uint64_t seed)
{
    const Matrix X = oracle::gaussian(n, p, seed);
    Vector beta = Vector::Zero(p);
    beta.head(3) << 1.0, -0.8, 0.6;
    const Vector y = X * beta + 0.5 * oracle::gaussian(n, 1, seed + 1);
    CsvTable t;
    t.header = {"y"};
    for (Index j = 0; j < p; ++j) t.header.push_back("x" + std::to_string(j + 1));
    for (Index i = 0; i < n; ++i) {
        std::vector<std::string> row{format_double(y(i) + 3.0)};
        for (Index j = 0; j < p; ++j) row.push_back(format_double(2.0 * X(i, j) + 1.0));
        t.rows.push_back(std::move(row));
    }
    std::ofstream(file) << to_csv_string(t);
}

json small_simulation(const fs::path& out)
{
    return json{{"scenarios", {1}},  {"replications", 2}, {"seed", 5},         {"methods", {"meboost", "lasso"}},
                {"rules", {"min_mse_m"}}, {"tau_grid", {0.5, 1.0}}, {"iterations", 200}, {"K", 3},
                {"output", out.string()}};
}

int run_cli(const std::string& args, const fs::path& log)
{
    const std::string cmd = std::string(MEBOOST_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Simulate, ByteIdenticalAcrossRuns)
{
    TempDir dir;
    std::ostringstream sink;
    cmd_simulate(small_simulation(dir / "a"), sink);
    cmd_simulate(small_simulation(dir / "b"), sink);
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
    EXPECT_EQ(slurp(dir / "a.txt"), slurp(dir / "b.txt"));
    EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
    auto jobs = small_simulation(dir / "c");
    jobs["jobs"] = 3;
    cmd_simulate(jobs, sink);
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "c.csv"));

    const auto table = read_csv(dir / "a.csv");
    EXPECT_EQ(table.header[0], "Scenario");
    EXPECT_EQ(table.header[6], "SPEC");
    EXPECT_EQ(table.rows.size(), 2u);
    EXPECT_EQ(table.rows[0][1], "MEBoost");
    EXPECT_EQ(table.rows[1][1], "Lasso");
    const auto j = json::parse(slurp(dir / "a.json"));
    EXPECT_EQ(j.at("config").at("seed"), 5);
}

TEST(Simulate, SingleReplicationHasNoStandardErrors)
{
    TempDir dir;
    auto cfg = small_simulation(dir / "one");
    cfg["replications"] = 1;
    cfg["methods"] = {"lasso"};
    std::ostringstream sink;
    cmd_simulate(cfg, sink);
    const auto table = read_csv(dir / "one.csv");
    EXPECT_EQ(table.rows.size(), 1u);
    for (const auto& h : table.header) EXPECT_EQ(h.rfind("SE_", 0), std::string::npos) << h;
}

TEST(Simulate, ConfigErrorsAreEnumerated)
{
    std::ostringstream sink;
    json bad{{"scenarios", {0}}, {"replications", 0}, {"methods", {"ridge"}}};
    EXPECT_THROW(cmd_simulate(bad, sink), InvalidArgument);
    EXPECT_THROW(cmd_simulate(json{{"unknown_key", 1}}, sink), InvalidArgument);
    try {
        cmd_simulate(json{{"replications", 0}, {"K", 1}}, sink);
        FAIL();
    } catch (const InvalidArgument& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("replications"), std::string::npos);
        EXPECT_NE(msg.find("K"), std::string::npos);
    }
}

TEST(Path, ZeroIterationsWritesOriginOnly)
{
    TempDir dir;
    write_linear_csv(dir / "d.csv", 30, 4, 1);
    std::ostringstream sink;
    cmd_path(json{{"data", (dir / "d.csv").string()}, {"outcome", "y"}, {"iterations", 0},
                  {"output", (dir / "p.csv").string()}},
             sink);
    const std::string text = slurp(dir / "p.csv");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
    const auto t = read_csv(dir / "p.csv");
    EXPECT_EQ(t.header, (std::vector<std::string>{"t", "l1", "sigma2", "beta_x1", "beta_x2", "beta_x3", "beta_x4"}));
    EXPECT_EQ(t.rows[0][0], "0");
}

TEST(Path, L1ColumnRoundTrips)
{
    TempDir dir;
    write_linear_csv(dir / "d.csv", 40, 6, 2);
    std::ostringstream sink;
    const auto path = cmd_path(json{{"data", (dir / "d.csv").string()}, {"outcome", "y"}, {"tau", 0.5},
                                    {"iterations", 300}, {"output", (dir / "p.csv").string()}},
                               sink);
    const auto data = to_numeric(read_csv(dir / "p.csv"));
    ASSERT_EQ(data.values.rows(), 301);
    for (Index r = 0; r < data.values.rows(); ++r) {
        if (r > 0) {
            EXPECT_GT(data.values(r, 0), data.values(r - 1, 0));
        }
        EXPECT_NEAR(data.values.row(r).tail(6).lpNorm<1>(), data.values(r, 1), 1e-9);
    }
    EXPECT_EQ(path.steps.size(), 301u);
}

TEST(Fit, ZeroErrorMatchesLassoAtMatchedNorm)
{
    TempDir dir;
    write_linear_csv(dir / "d.csv", 120, 6, 3);
    json cfg{{"data", (dir / "d.csv").string()},
             {"outcome", "y"},
             {"error_spec", {{"columns", json::array({{{"name", "x1"}, {"variance", 0.0}}, {{"name", "x2"}, {"variance", 0.0}}})}}},
             {"tau_grid", {1.0}},
             {"gamma", 1e-3},
             {"iterations", 4000},
             {"K", 5},
             {"seed", 7}};
    std::ostringstream sink;
    const auto report = cmd_fit(cfg, sink);
    ASSERT_EQ(report.fits.size(), 2u);
    const auto& boost = report.fits[0];
    EXPECT_EQ(boost.method, "MEBoost");
    EXPECT_EQ(report.fits[1].method, "Lasso");

    // Same training data as the fit: standardized columns, training split, centered outcome.
    const auto prep = prepare_data(to_numeric(read_csv(dir / "d.csv")), "y", Family::linear);
    const auto split = train_test_split(prep.W.rows(), 0.3, 7);
    const Matrix W = prep.W(split.train, Eigen::all);
    Vector Y = prep.Y(split.train);
    Y.array() -= Y.mean();
    const double n = static_cast<double>(W.rows());
    const QuadProblem base{W.transpose() * W / n, W.transpose() * Y / n, 0.0, {}};
    double lo = 0.0;
    double hi = naive_lambda_max(W, Y);
    Vector beta;
    for (int it = 0; it < 100; ++it) {
        QuadProblem prob = base;
        prob.lambda = 0.5 * (lo + hi);
        beta = coordinate_descent_quadratic(prob, Vector::Zero(6), 1e-12, 100000).beta;
        if (beta.lpNorm<1>() > boost.l1_norm) lo = prob.lambda;
        else hi = prob.lambda;
    }
    EXPECT_NEAR(beta.lpNorm<1>(), boost.l1_norm, 1e-6);
    EXPECT_LE((beta - boost.beta).cwiseAbs().maxCoeff(), 0.05);
    EXPECT_NE(sink.str().find("Deviance"), std::string::npos);
}

TEST(Fit, DataErrors)
{
    TempDir dir;
    write_linear_csv(dir / "d.csv", 30, 3, 4);
    std::ostringstream sink;
    json cfg{{"data", (dir / "d.csv").string()}, {"outcome", "nope"}};
    EXPECT_THROW(cmd_fit(cfg, sink), DataError);
    cfg["outcome"] = "y";
    cfg["error_spec"] = {{"columns", json::array({{{"name", "x1"}, {"variance", 0.6}}})}};
    cfg["delta_scale_grid"] = {2.0};
    EXPECT_THROW(cmd_fit(cfg, sink), DataError);
    cfg["error_spec"] = {{"columns", json::array({{{"name", "zz"}, {"variance", 0.1}}})}};
    cfg["delta_scale_grid"] = {1.0};
    EXPECT_THROW(cmd_fit(cfg, sink), DataError);
    cfg["data"] = (dir / "missing.csv").string();
    EXPECT_THROW(cmd_fit(cfg, sink), DataError);
}

TEST(Bench, SmallProblemIsQuick)
{
    const auto start = std::chrono::steady_clock::now();
    std::ostringstream sink;
    const auto r = cmd_bench(json{{"n", 100}, {"p", 10}}, sink);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_LT(elapsed, 5.0);
    EXPECT_GT(r.meboost_seconds, 0.0);
    EXPECT_GT(r.cocolasso_seconds, 0.0);
    EXPECT_EQ(r.block_size, 10);
    EXPECT_NE(sink.str().find("ratio"), std::string::npos);
    EXPECT_THROW(cmd_bench(json{{"n", 5}, {"p", 10}}, sink), InvalidArgument);
}

TEST(Cli, ExitCodes)
{
    TempDir dir;
    write_linear_csv(dir / "d.csv", 30, 3, 5);
    const auto log = dir / "log.txt";
    EXPECT_EQ(run_cli("--help", log), 0);
    EXPECT_EQ(run_cli("", log), 1);
    EXPECT_EQ(run_cli("simulate --no-such-flag", log), 1);
    EXPECT_EQ(run_cli("simulate --replications 0", log), 1);
    {
        std::ofstream(dir / "bad.json") << "{ not json";
        EXPECT_EQ(run_cli("simulate --config " + (dir / "bad.json").string(), log), 1);
    }
    EXPECT_EQ(run_cli("fit --data " + (dir / "missing.csv").string() + " --outcome y", log), 2);
    EXPECT_EQ(run_cli("fit --data " + (dir / "d.csv").string() + " --outcome nope", log), 2);
    {
        std::ofstream(dir / "proj.json") << R"({"n": 20, "p": 30, "projection": {"max_iter": 1, "tol": 1e-12}})";
        EXPECT_EQ(run_cli("bench --config " + (dir / "proj.json").string(), log), 3);
        EXPECT_FALSE(slurp(log).empty());
    }
    EXPECT_EQ(run_cli("path --data " + (dir / "d.csv").string() + " --outcome y -T 5 --out " +
                          (dir / "p.csv").string(),
                      log),
              0);
    EXPECT_EQ(read_csv(dir / "p.csv").rows.size(), 6u);
}

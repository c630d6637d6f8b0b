#include <meboost/commands.hpp>

#include <chrono>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include <meboost/datagen.hpp>
#include <meboost/quad_lasso.hpp>
#include <meboost/report.hpp>

namespace meboost {
namespace {

void write_file(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError(fmt::format("cannot write {}", path.string()));
    f << content;
    if (!f) throw DataError(fmt::format("error writing {}", path.string()));
}

std::optional<std::filesystem::path> output_of(const nlohmann::json& config)
{
    if (!config.contains("output")) return std::nullopt;
    return std::filesystem::path(config.at("output").get<std::string>());
}

std::filesystem::path with_suffix(const std::filesystem::path& prefix, std::string_view suffix)
{
    return prefix.string() + std::string(suffix);
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Largest divisor of p not above 10, so the block structure tiles p exactly.
Index block_size_for(Index p)
{
    for (Index b = 10; b > 1; --b)
        if (p % b == 0) return b;
    return 1;
}

} // namespace

nlohmann::json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidArgument(fmt::format("cannot open config {}", path.string()));
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(fmt::format("{}: {}", path.string(), e.what()));
    }
}

SimulationResult cmd_simulate(const nlohmann::json& config, std::ostream& out)
{
    const auto cfg = config.get<SimulationConfig>();
    const auto result = run_simulation(cfg);
    const auto text = render_simulation_text(result);
    if (const auto prefix = output_of(config)) {
        write_file(with_suffix(*prefix, ".csv"), to_csv_string(simulation_table(result)));
        write_file(with_suffix(*prefix, ".txt"), text);
        write_file(with_suffix(*prefix, ".json"), simulation_json(result).dump(2) + '\n');
    } else {
        out << text;
    }
    return result;
}

FitReport cmd_fit(const nlohmann::json& config, std::ostream& out)
{
    const auto cfg = config.get<FitConfig>();
    if (cfg.data.empty()) throw InvalidArgument("fit: no data file given");
    const auto report = run_fit(cfg);
    const auto text = render_coefficient_table(report);
    if (const auto prefix = output_of(config)) {
        write_file(with_suffix(*prefix, ".csv"), to_csv_string(fit_table(report)));
        write_file(with_suffix(*prefix, ".txt"), text);
        write_file(with_suffix(*prefix, ".json"), fit_json(report).dump(2) + '\n');
    } else {
        out << text;
    }
    return report;
}

CoefficientPath cmd_path(const nlohmann::json& config, std::ostream& out)
{
    const auto cfg = config.get<PathConfig>();
    if (cfg.data.empty()) throw InvalidArgument("path: no data file given");
    std::vector<std::string> names;
    const auto path = run_path(to_numeric(read_csv(cfg.data)), cfg, &names);
    const auto csv = to_csv_string(path_table(path, names));
    if (const auto file = output_of(config))
        write_file(*file, csv);
    else
        out << csv;
    return path;
}

void from_json(const nlohmann::json& j, BenchConfig& cfg)
{
    cfg = BenchConfig{};
    try {
        cfg.n = j.value("n", cfg.n);
        cfg.p = j.value("p", cfg.p);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.gamma = j.value("gamma", cfg.gamma);
        cfg.iterations = j.value("iterations", cfg.iterations);
        cfg.lambda_count = j.value("lambda_count", cfg.lambda_count);
        cfg.lambda_ratio = j.value("lambda_ratio", cfg.lambda_ratio);
        if (j.contains("projection")) {
            const auto& p = j.at("projection");
            cfg.projection.eps_pd = p.value("eps_pd", cfg.projection.eps_pd);
            cfg.projection.tol = p.value("tol", cfg.projection.tol);
            cfg.projection.max_iter = p.value("max_iter", cfg.projection.max_iter);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(fmt::format("bench config: {}", e.what()));
    }
}

BenchResult run_bench(const BenchConfig& cfg)
{
    detail::require(cfg.n >= 10 && cfg.p >= 10, fmt::format("bench needs n, p >= 10 (got n={}, p={})", cfg.n, cfg.p));
    ScenarioSpec spec = default_scenario_spec(1);
    spec.n = cfg.n;
    spec.p = cfg.p;
    spec.block_size = block_size_for(cfg.p);
    spec.beta_true = Vector::Zero(cfg.p);
    spec.beta_true.head(10).setOnes();
    spec.delta_assumed = 0.75 * Matrix::Identity(cfg.p, cfg.p);
    if (auto* g = std::get_if<NormalIid>(&spec.error_generator)) g->variance = 0.75;
    const auto data = generate_scenario(spec, cfg.seed);
    const MeasurementErrorModel err{spec.delta_assumed};

    BenchResult r;
    r.config = cfg;
    r.block_size = spec.block_size;

    BoostConfig bc;
    bc.gamma = cfg.gamma;
    bc.iterations = cfg.iterations;
    auto start = std::chrono::steady_clock::now();
    const auto path = meboost_path(data.W, data.Y, err, bc);
    r.meboost_seconds = seconds_since(start);

    start = std::chrono::steady_clock::now();
    auto moments = corrected_moments(data.W, data.Y, err);
    const auto projected = nearest_pd_projection(moments.sigma_hat, cfg.projection);
    r.projection_seconds = seconds_since(start);
    const auto lambdas = lambda_grid(moments.rho_tilde.cwiseAbs().maxCoeff(), cfg.lambda_count, cfg.lambda_ratio);
    const auto lasso = quadratic_lasso_path(projected.matrix, moments.rho_tilde, lambdas);
    r.cocolasso_seconds = seconds_since(start);
    r.projection = projected.diagnostics;
    if (path.steps.empty() || lasso.empty()) throw NumericalError("bench: empty path");
    return r;
}

BenchResult cmd_bench(const nlohmann::json& config, std::ostream& out)
{
    const auto cfg = config.get<BenchConfig>();
    const auto r = run_bench(cfg);
    const auto text = fmt::format(
        "n={} p={} seed={}\n"
        "MEBoost path:   {:.3f} s ({} iterations)\n"
        "CoCoLasso path: {:.3f} s (projection {:.3f} s, {} iterations; {} lambdas)\n"
        "ratio CoCoLasso / MEBoost: {:.2f}\n",
        cfg.n, cfg.p, cfg.seed, r.meboost_seconds, cfg.iterations, r.cocolasso_seconds, r.projection_seconds,
        r.projection.iterations, cfg.lambda_count, r.ratio());
    out << text;
    if (const auto prefix = output_of(config)) {
        nlohmann::json j{{"n", cfg.n},
                         {"p", cfg.p},
                         {"seed", cfg.seed},
                         {"block_size", r.block_size},
                         {"gamma", cfg.gamma},
                         {"iterations", cfg.iterations},
                         {"lambda_count", cfg.lambda_count},
                         {"lambda_ratio", cfg.lambda_ratio},
                         {"meboost_seconds", r.meboost_seconds},
                         {"cocolasso_seconds", r.cocolasso_seconds},
                         {"projection_seconds", r.projection_seconds},
                         {"projection_iterations", r.projection.iterations},
                         {"projection_distance", r.projection.distance},
                         {"ratio", r.ratio()}};
        write_file(with_suffix(*prefix, ".txt"), text);
        write_file(with_suffix(*prefix, ".json"), j.dump(2) + '\n');
    }
    return r;
}

} // namespace meboost

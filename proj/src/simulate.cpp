#include <meboost/simulate.hpp>

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include <meboost/parallel.hpp>
#include <meboost/quad_lasso.hpp>
#include <meboost/random.hpp>
#include <meboost/selection.hpp>

namespace meboost {
namespace {

constexpr std::uint64_t kCvStream = 0x6376;

template <class T>
std::vector<T> from_names(const nlohmann::json& j, T (*parse)(std::string_view))
{
    std::vector<T> out;
    for (const auto& item : j) out.push_back(parse(item.get<std::string>()));
    return out;
}

bool same_matrix(const Matrix& a, const Matrix& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

bool is_builtin(const ScenarioSpec& spec)
{
    if (spec.scenario_id < 1 || spec.scenario_id > 10) return false;
    const auto ref = default_scenario_spec(spec.scenario_id);
    return nlohmann::json(spec) == nlohmann::json(ref) && same_matrix(spec.delta_assumed, ref.delta_assumed);
}

ScenarioSpec scenario_from_json(const nlohmann::json& j)
{
    if (j.is_number_integer()) {
        const int id = j.get<int>();
        if (id < 1 || id > 10) throw InvalidArgument(fmt::format("scenario id {} is not in 1..10", id));
        return default_scenario_spec(id);
    }
    if (!j.is_object()) throw InvalidArgument("scenarios entries must be ids or objects");
    // An object starts from its built-in scenario (if the id is one) and overrides fields.
    nlohmann::json base = nlohmann::json::object();
    const int id = j.value("scenario_id", 0);
    if (id >= 1 && id <= 10) base = default_scenario_spec(id);
    base.merge_patch(j);
    return base.get<ScenarioSpec>();
}

FitMetrics pick(const std::vector<FitMetrics>& grid, SelectionRule rule)
{
    if (grid.empty()) throw NumericalError("path reaches no point of the L1 grid");
    return rule == SelectionRule::min_mse ? select_min_mse(grid) : select_min_mse_m(grid);
}

// Warm-started lambda path cut after the first solution whose L1 norm reaches l1_stop. For every
// grid value up to l1_stop the first bracketing pair of steps lies before the cut, so the grid
// metrics are those of the full path.
CoefficientPath lasso_path_until(const Matrix& sigma, const Vector& rho, std::span<const double> lambdas,
                                 double l1_stop)
{
    QuadProblem prob{sigma, rho, lambdas.front(), Vector()};
    prob.validate();
    LassoPath path;
    Vector beta = Vector::Zero(rho.size());
    for (double lambda : lambdas) {
        prob.lambda = lambda;
        auto res = coordinate_descent_quadratic(prob, beta, kDefaultLassoTol, kDefaultLassoMaxSweeps);
        beta = res.beta;
        path.push_back(LassoSolution{lambda, std::move(res.beta), res.sweeps, res.converged});
        if (beta.lpNorm<1>() >= l1_stop) break;
    }
    return to_coefficient_path(path);
}

bool wants(const SimulationConfig& cfg, SelectionRule rule)
{
    return std::find(cfg.rules.begin(), cfg.rules.end(), rule) != cfg.rules.end();
}

} // namespace

std::string_view to_string(SimMethod method)
{
    switch (method) {
    case SimMethod::meboost: return "meboost";
    case SimMethod::lasso: return "lasso";
    case SimMethod::cocolasso: return "cocolasso";
    }
    return "unknown";
}

std::string_view display_name(SimMethod method)
{
    switch (method) {
    case SimMethod::meboost: return "MEBoost";
    case SimMethod::lasso: return "Lasso";
    case SimMethod::cocolasso: return "CoCoLasso";
    }
    return "unknown";
}

SimMethod parse_sim_method(std::string_view name)
{
    if (name == "meboost") return SimMethod::meboost;
    if (name == "lasso") return SimMethod::lasso;
    if (name == "cocolasso") return SimMethod::cocolasso;
    throw InvalidArgument(fmt::format("unknown method '{}' (expected meboost, lasso or cocolasso)", name));
}

std::string_view to_string(SelectionRule rule)
{
    switch (rule) {
    case SelectionRule::min_mse_m: return "min_mse_m";
    case SelectionRule::min_mse: return "min_mse";
    case SelectionRule::cv: return "cv";
    }
    return "unknown";
}

SelectionRule parse_selection_rule(std::string_view name)
{
    if (name == "min_mse_m") return SelectionRule::min_mse_m;
    if (name == "min_mse") return SelectionRule::min_mse;
    if (name == "cv") return SelectionRule::cv;
    throw InvalidArgument(fmt::format("unknown selection rule '{}' (expected min_mse_m, min_mse or cv)", name));
}

void SimulationConfig::validate() const
{
    std::vector<std::string> problems;
    if (scenarios.empty()) problems.emplace_back("scenarios is empty");
    if (replications < 1) problems.push_back(fmt::format("replications must be >= 1 (got {})", replications));
    if (methods.empty()) problems.emplace_back("methods is empty");
    if (rules.empty()) problems.emplace_back("rules is empty");
    if (tau_grid.empty()) problems.emplace_back("tau_grid is empty");
    for (double t : tau_grid)
        if (!(t >= 0.0 && t <= 1.0)) problems.push_back(fmt::format("tau {} outside [0, 1]", t));
    if (!(gamma > 0.0)) problems.push_back(fmt::format("gamma must be positive (got {})", gamma));
    if (iterations < 0) problems.push_back(fmt::format("iterations must be >= 0 (got {})", iterations));
    if (l1_grid.empty()) problems.emplace_back("l1_grid is empty");
    if (lambda_count < 1) problems.push_back(fmt::format("lambda_count must be >= 1 (got {})", lambda_count));
    if (!(lambda_ratio > 0.0 && lambda_ratio < 1.0))
        problems.push_back(fmt::format("lambda_ratio must lie in (0, 1) (got {})", lambda_ratio));
    if (K < 2) problems.push_back(fmt::format("K must be >= 2 (got {})", K));
    if (jobs < 1) problems.push_back(fmt::format("jobs must be >= 1 (got {})", jobs));
    for (const auto& s : scenarios) {
        try {
            s.validate();
            if (K > s.n) problems.push_back(fmt::format("K={} exceeds n={} in scenario {}", K, s.n, s.scenario_id));
        } catch (const InvalidArgument& e) {
            problems.push_back(fmt::format("scenario {}: {}", s.scenario_id, e.what()));
        }
    }
    if (problems.empty()) return;
    std::string message = "invalid simulation config:";
    for (const auto& p : problems) message += "\n  - " + p;
    throw InvalidArgument(message);
}

void from_json(const nlohmann::json& j, SimulationConfig& cfg)
{
    static const std::set<std::string> known{"scenarios", "replications", "seed",   "methods",
                                             "rules",     "tau_grid",     "gamma",  "iterations",
                                             "l1_grid",   "lambda_count", "lambda_ratio", "K",
                                             "jobs",      "projection",   "output"};
    if (!j.is_object()) throw InvalidArgument("simulation config must be a JSON object");
    std::vector<std::string> unknown;
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) unknown.push_back(key);
    if (!unknown.empty()) {
        std::string list;
        for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
        throw InvalidArgument(fmt::format("unknown simulation config field(s): {}", list));
    }

    cfg = SimulationConfig{};
    try {
        if (j.contains("scenarios")) {
            const auto& s = j.at("scenarios");
            if (s.is_array()) {
                for (const auto& item : s) cfg.scenarios.push_back(scenario_from_json(item));
            } else {
                cfg.scenarios.push_back(scenario_from_json(s));
            }
        } else {
            cfg.scenarios.push_back(default_scenario_spec(1));
        }
        cfg.replications = j.value("replications", cfg.replications);
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("methods")) cfg.methods = from_names(j.at("methods"), parse_sim_method);
        if (j.contains("rules")) cfg.rules = from_names(j.at("rules"), parse_selection_rule);
        if (j.contains("tau_grid")) cfg.tau_grid = j.at("tau_grid").get<std::vector<double>>();
        cfg.gamma = j.value("gamma", cfg.gamma);
        cfg.iterations = j.value("iterations", cfg.iterations);
        if (j.contains("l1_grid")) cfg.l1_grid = j.at("l1_grid").get<std::vector<double>>();
        cfg.lambda_count = j.value("lambda_count", cfg.lambda_count);
        cfg.lambda_ratio = j.value("lambda_ratio", cfg.lambda_ratio);
        cfg.K = j.value("K", cfg.K);
        cfg.jobs = j.value("jobs", cfg.jobs);
        if (j.contains("projection")) {
            const auto& p = j.at("projection");
            cfg.projection.eps_pd = p.value("eps_pd", cfg.projection.eps_pd);
            cfg.projection.tol = p.value("tol", cfg.projection.tol);
            cfg.projection.max_iter = p.value("max_iter", cfg.projection.max_iter);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(fmt::format("simulation config: {}", e.what()));
    }
}

void to_json(nlohmann::json& j, const SimulationConfig& cfg)
{
    nlohmann::json scenarios = nlohmann::json::array();
    for (const auto& s : cfg.scenarios) {
        if (is_builtin(s))
            scenarios.push_back(s.scenario_id);
        else
            scenarios.push_back(s);
    }
    nlohmann::json methods = nlohmann::json::array();
    for (auto m : cfg.methods) methods.push_back(to_string(m));
    nlohmann::json rules = nlohmann::json::array();
    for (auto r : cfg.rules) rules.push_back(to_string(r));
    j = nlohmann::json{
        {"scenarios", scenarios},
        {"replications", cfg.replications},
        {"seed", cfg.seed},
        {"methods", methods},
        {"rules", rules},
        {"tau_grid", cfg.tau_grid},
        {"gamma", cfg.gamma},
        {"iterations", cfg.iterations},
        {"l1_grid", cfg.l1_grid},
        {"lambda_count", cfg.lambda_count},
        {"lambda_ratio", cfg.lambda_ratio},
        {"K", cfg.K},
        {"jobs", cfg.jobs},
        {"projection",
         {{"eps_pd", cfg.projection.eps_pd}, {"tol", cfg.projection.tol}, {"max_iter", cfg.projection.max_iter}}},
    };
}

std::size_t ScenarioResult::failures() const
{
    return static_cast<std::size_t>(
        std::count_if(replications.begin(), replications.end(), [](const auto& r) { return !r.ok; }));
}

std::vector<FitMetrics> ScenarioResult::collect(SimMethod method, SelectionRule rule) const
{
    std::vector<FitMetrics> out;
    for (const auto& r : replications) {
        if (!r.ok) continue;
        const auto m = r.methods.find(method);
        if (m == r.methods.end()) continue;
        const auto f = m->second.metrics.find(rule);
        if (f != m->second.metrics.end()) out.push_back(f->second);
    }
    return out;
}

MetricsSummary ScenarioResult::summary(SimMethod method, SelectionRule rule) const
{
    const auto values = collect(method, rule);
    if (values.empty()) return {};
    return aggregate_replications(values);
}

ReplicationOutcome run_replication(const ScenarioSpec& spec, const SimulationConfig& cfg, int replication,
                                   std::uint64_t seed)
{
    const auto train = generate_scenario(spec, seed, DatasetRole::train);
    const auto test = generate_scenario(spec, seed, DatasetRole::test);
    const MeasurementErrorModel err{spec.delta_assumed};
    const CVOptions cv{cfg.K, derive_seed(seed, {kCvStream}), 1};
    const bool use_cv = wants(cfg, SelectionRule::cv);

    ReplicationOutcome out;
    out.replication = replication;
    out.seed = seed;

    auto score_path = [&](const CoefficientPath& path, MethodOutcome& mo) {
        const auto grid = path_metrics_on_grid(path, spec.beta_true, test.X, test.W, test.Y, cfg.l1_grid);
        for (auto rule : cfg.rules)
            if (rule != SelectionRule::cv) mo.metrics[rule] = pick(grid, rule);
    };
    auto score_beta = [&](const Vector& beta) {
        return evaluate_fit(beta, spec.beta_true, test.X, test.W, test.Y);
    };

    const auto lambdas = lambda_grid(naive_lambda_max(train.W, train.Y), cfg.lambda_count, cfg.lambda_ratio);
    for (auto method : cfg.methods) {
        MethodOutcome mo;
        if (method == SimMethod::meboost) {
            BoostConfig bc;
            bc.gamma = cfg.gamma;
            bc.iterations = cfg.iterations;
            const auto res = cv_select_meboost(train.W, train.Y, err, cfg.tau_grid, bc, cv);
            mo.chosen_tau = res.chosen_tau;
            out.variance_floored = out.variance_floored || res.refit_path.any_variance_floored();
            score_path(res.refit_path, mo);
            if (use_cv) mo.metrics[SelectionRule::cv] = score_beta(res.final_beta);
        } else {
            LassoCVSettings settings;
            settings.method = method == SimMethod::lasso ? LassoMethod::naive : LassoMethod::cocolasso;
            settings.projection = cfg.projection;
            if (use_cv) {
                const auto res = cv_select_lasso(train.W, train.Y, err, lambdas, settings, cv);
                score_path(res.refit_path, mo);
                mo.metrics[SelectionRule::cv] = score_beta(res.final_beta);
            } else {
                const double stop = *std::max_element(cfg.l1_grid.begin(), cfg.l1_grid.end());
                const auto moments = corrected_moments(train.W, train.Y, err);
                Matrix sigma;
                if (method == SimMethod::cocolasso) {
                    sigma = nearest_pd_projection(moments.sigma_hat, cfg.projection).matrix;
                } else {
                    sigma = train.W.transpose() * train.W / static_cast<double>(train.W.rows());
                    sigma = 0.5 * (sigma + sigma.transpose()).eval();
                }
                score_path(lasso_path_until(sigma, moments.rho_tilde, lambdas, stop), mo);
            }
        }
        out.methods.emplace(method, std::move(mo));
    }
    return out;
}

SimulationResult run_simulation(const SimulationConfig& cfg)
{
    cfg.validate();
    SimulationResult result;
    result.config = cfg;
    const std::size_t reps = static_cast<std::size_t>(cfg.replications);
    for (const auto& s : cfg.scenarios) {
        ScenarioResult sr;
        sr.spec = s;
        sr.replications.resize(reps);
        result.scenarios.push_back(std::move(sr));
    }
    parallel_for(cfg.scenarios.size() * reps, cfg.jobs, [&](std::size_t cell) {
        auto& sr = result.scenarios[cell / reps];
        const int r = static_cast<int>(cell % reps);
        const std::uint64_t seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(r)});
        try {
            sr.replications[static_cast<std::size_t>(r)] = run_replication(sr.spec, cfg, r, seed);
        } catch (const Error& e) {
            ReplicationOutcome failed;
            failed.replication = r;
            failed.seed = seed;
            failed.ok = false;
            failed.error = e.what();
            sr.replications[static_cast<std::size_t>(r)] = std::move(failed);
        }
    });
    return result;
}

} // namespace meboost

#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include <meboost/cocolasso.hpp>
#include <meboost/datagen.hpp>
#include <meboost/metrics.hpp>
#include <meboost/path.hpp>

namespace meboost {

enum class SimMethod { meboost, lasso, cocolasso };

/// How a single model is read off each method's path in a replication.
///  - min_mse_m / min_mse: the L1-grid point with the smallest test error on W / on X.
///  - cv: the cross-validated final model (needs K extra fits per Lasso variant).
enum class SelectionRule { min_mse_m, min_mse, cv };

std::string_view to_string(SimMethod method);
std::string_view display_name(SimMethod method);  ///< "MEBoost", "Lasso", "CoCoLasso"
SimMethod parse_sim_method(std::string_view name);
std::string_view to_string(SelectionRule rule);
SelectionRule parse_selection_rule(std::string_view name);

struct SimulationConfig {
    std::vector<ScenarioSpec> scenarios;
    int replications = 100;
    std::uint64_t seed = 1;
    std::vector<SimMethod> methods{SimMethod::meboost, SimMethod::lasso, SimMethod::cocolasso};
    std::vector<SelectionRule> rules{SelectionRule::min_mse_m, SelectionRule::min_mse, SelectionRule::cv};
    std::vector<double> tau_grid{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    double gamma = 0.01;
    int iterations = 1000;
    std::vector<double> l1_grid = default_l1_grid();
    int lambda_count = 100;
    double lambda_ratio = 1e-3;
    int K = 5;
    int jobs = 1;
    ProjectionOptions projection;

    void validate() const;
};

/// Scenarios may be given as ids (built-in parameterization) or as full ScenarioSpec objects.
void from_json(const nlohmann::json& j, SimulationConfig& cfg);
void to_json(nlohmann::json& j, const SimulationConfig& cfg);

struct MethodOutcome {
    std::map<SelectionRule, FitMetrics> metrics;
    std::optional<double> chosen_tau;  ///< MEBoost
};

struct ReplicationOutcome {
    int replication = 0;
    std::uint64_t seed = 0;
    bool ok = true;
    std::string error;
    std::map<SimMethod, MethodOutcome> methods;
    bool variance_floored = false;  ///< some MEBoost path hit the variance floor
};

struct ScenarioResult {
    ScenarioSpec spec;
    std::vector<ReplicationOutcome> replications;

    std::size_t failures() const;
    /// Metrics of `method` under `rule` over the successful replications, in replication order.
    std::vector<FitMetrics> collect(SimMethod method, SelectionRule rule) const;
    MetricsSummary summary(SimMethod method, SelectionRule rule) const;
};

struct SimulationResult {
    SimulationConfig config;
    std::vector<ScenarioResult> scenarios;
};

/// One replication: independent train and test draws from `seed`, every configured method fit on
/// the training data and scored on the test data. Errors propagate.
ReplicationOutcome run_replication(const ScenarioSpec& spec, const SimulationConfig& cfg, int replication,
                                   std::uint64_t seed);

/// Every scenario x replication. Replication r uses derive_seed(cfg.seed, {r}) in every scenario,
/// so scenarios share covariates and outcome noise. A replication that throws is kept with
/// ok = false and its message; the rest continue.
SimulationResult run_simulation(const SimulationConfig& cfg);

} // namespace meboost

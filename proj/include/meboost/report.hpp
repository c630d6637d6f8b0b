#pragma once
#include <string>
#include <vector>

#include <json.hpp>

#include <meboost/csv.hpp>
#include <meboost/fit.hpp>
#include <meboost/path.hpp>
#include <meboost/simulate.hpp>

namespace meboost {

/// Coefficients below this magnitude are left blank in the rendered coefficient grid.
inline constexpr double kDisplayThreshold = 0.05;

/// Scenario, Method, MSE, MSE-M, L1D, SENS, SPEC per scenario and method under `rule`, then the
/// standard errors (only when some row has them), replications used and replications failed.
CsvTable simulation_table(const SimulationResult& result, SelectionRule rule = SelectionRule::min_mse_m);

/// Aligned text of simulation_table, standard errors in parentheses.
std::string render_simulation_table(const SimulationResult& result, SelectionRule rule = SelectionRule::min_mse_m);

/// Every configured rule, failure messages, seed and config.
std::string render_simulation_text(const SimulationResult& result);

/// Config echo, per-scenario summaries for every rule, chosen thresholds and failures.
nlohmann::json simulation_json(const SimulationResult& result);

/// Variables with |beta| >= kDisplayThreshold in at least one column (intercept excluded), in
/// predictor order.
std::vector<std::size_t> displayed_rows(const FitReport& report);

/// Coefficient grid: one column per fit, "-" for coefficients that are exactly zero, blank for
/// nonzero coefficients below the threshold, then Deviance and MSE-M rows.
std::string render_coefficient_table(const FitReport& report);

/// Full coefficient vectors, one row per coefficient, plus the loss rows. No suppression.
CsvTable fit_table(const FitReport& report);

nlohmann::json fit_json(const FitReport& report);

/// t, l1, sigma2 ("NA" when absent), beta_<name>...
CsvTable path_table(const CoefficientPath& path, const std::vector<std::string>& names);

} // namespace meboost

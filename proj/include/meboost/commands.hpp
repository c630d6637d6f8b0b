#pragma once
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include <json.hpp>

#include <meboost/cocolasso.hpp>
#include <meboost/fit.hpp>
#include <meboost/simulate.hpp>

namespace meboost {

// Each command takes its merged JSON config (file contents with command-line overrides applied).
// When the config has "output", results go to files; otherwise the text report goes to `out`.
//
//   simulate, fit: "output" is a prefix; <prefix>.csv, <prefix>.txt and <prefix>.json are written.
//   path:          "output" is the CSV file.
//   bench:         "output" is a prefix; <prefix>.txt and <prefix>.json are written.

SimulationResult cmd_simulate(const nlohmann::json& config, std::ostream& out);
FitReport cmd_fit(const nlohmann::json& config, std::ostream& out);
CoefficientPath cmd_path(const nlohmann::json& config, std::ostream& out);

struct BenchConfig {
    Index n = 1000;
    Index p = 1000;
    std::uint64_t seed = 1;
    double gamma = 0.01;
    int iterations = 1000;
    int lambda_count = 100;
    double lambda_ratio = 1e-3;
    ProjectionOptions projection;
};

void from_json(const nlohmann::json& j, BenchConfig& cfg);

struct BenchResult {
    BenchConfig config;
    Index block_size = 10;
    double meboost_seconds = 0.0;
    double cocolasso_seconds = 0.0;
    double projection_seconds = 0.0;  ///< part of cocolasso_seconds
    ProjectionDiagnostics projection;
    double ratio() const { return cocolasso_seconds / meboost_seconds; }
};

/// Scenario-1-style data at (n, p): times one MEBoost path and one CoCoLasso path (projection
/// plus the lambda grid) on the same training set.
BenchResult run_bench(const BenchConfig& cfg);
BenchResult cmd_bench(const nlohmann::json& config, std::ostream& out);

/// Reads a JSON document; parse failures are usage errors.
nlohmann::json read_json_file(const std::filesystem::path& path);

} // namespace meboost

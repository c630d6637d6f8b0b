#pragma once
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include <meboost/common.hpp>
#include <meboost/random.hpp>

namespace meboost {

// Measurement error generators. Column index j below is 1-based within a block.

/// U_ij ~ N(0, variance), independent.
struct NormalIid {
    double variance = 0.75;
};

/// U_ij ~ N(0, base + increment * j), pattern repeating every block_size columns.
struct NormalVaryingVariance {
    double base = 0.3375;
    double increment = 0.075;
    int block_size = 10;
};

/// Exchangeable correlation within blocks, common variance.
struct NormalCorrelated {
    double variance = 0.75;
    double correlation = 0.3;
    int block_size = 10;
};

/// Varying variances with exchangeable correlation within blocks.
struct NormalVaryingCorrelated {
    double base = 0.3375;
    double increment = 0.075;
    double correlation = 0.3;
    int block_size = 10;
};

/// Diagonal variances alternating 0, variance, 0, variance, ... starting at column 1.
struct NormalAlternatingZero {
    double variance = 0.75;
};

/// U_ij ~ Uniform(lower, upper).
struct UniformError {
    double lower = -1.5;
    double upper = 1.5;
};

/// U_ij + shift ~ Exponential(rate).
struct ShiftedExponential {
    double rate = 1.0;
    double shift = 1.0;
};

using ErrorGenerator = std::variant<NormalIid, NormalVaryingVariance, NormalCorrelated,
                                    NormalVaryingCorrelated, NormalAlternatingZero, UniformError,
                                    ShiftedExponential>;

std::string_view generator_tag(const ErrorGenerator& gen);

/// Covariance matrix of one row of U under `gen`.
Matrix error_covariance(const ErrorGenerator& gen, Index p);

struct ScenarioSpec {
    int scenario_id = 1;
    Index n = 80;
    Index p = 100;
    Index block_size = 10;
    double phi = 0.3;
    Vector beta_true;
    double sigma_eps = 1.5;
    ErrorGenerator error_generator = NormalIid{};
    Matrix delta_assumed;

    /// Throws InvalidArgument when an invariant is violated.
    void validate() const;
};

/// Row labels used in simulation reports, one per built-in scenario.
std::string_view scenario_label(int scenario_id);

void to_json(nlohmann::json& j, const ErrorGenerator& gen);
void from_json(const nlohmann::json& j, ErrorGenerator& gen);
void to_json(nlohmann::json& j, const ScenarioSpec& spec);
void from_json(const nlohmann::json& j, ScenarioSpec& spec);

enum class DatasetRole : std::uint64_t { train = 0, test = 1 };

struct SimulatedDataset {
    Matrix X;
    Matrix W;
    Vector Y;
    ScenarioSpec spec;
    std::uint64_t seed = 0;
    DatasetRole role = DatasetRole::train;
};

/// Block-diagonal exchangeable correlation matrix.
Matrix build_block_covariance(Index p, Index block_size, double rho);

/// n i.i.d. rows from N(0, Sigma). Sigma must be positive definite.
Matrix sample_mvn(Index n, const Matrix& Sigma, std::uint64_t seed);
Matrix sample_mvn(Index n, const Matrix& Sigma, Rng& rng);

/// The built-in parameterization of scenarios 1..10.
ScenarioSpec default_scenario_spec(int scenario_id);

/// Draws X, U, and the outcome noise from independent substreams of `seed`.
///
/// The substreams depend only on (seed, role), so two scenarios generated with the same seed
/// share X and the outcome noise and differ only in U.
SimulatedDataset generate_scenario(const ScenarioSpec& spec, std::uint64_t seed,
                                   DatasetRole role = DatasetRole::train);

} // namespace meboost

#pragma once
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <meboost/common.hpp>
#include <meboost/csv.hpp>
#include <meboost/error_spec.hpp>
#include <meboost/path.hpp>
#include <meboost/standardize.hpp>

namespace meboost {

inline constexpr std::string_view kInterceptName = "(Intercept)";

/// Design matrix ready for fitting: standardized predictors, plus an error-free all-ones column
/// (last) for the Poisson family. Linear outcomes are left raw; centering happens per split.
struct PreparedData {
    std::vector<std::string> predictors;  ///< original predictor names, in column order
    std::vector<std::string> columns;     ///< predictors plus kInterceptName when present
    Matrix W;
    Vector Y;
    Family family = Family::linear;
    bool intercept = false;
    Standardization standardization;

    /// Delta over `columns`: the spec's variances times `scale`, zero for the intercept.
    Matrix delta(const ErrorSpec& spec, double scale) const;
};

/// Picks the outcome and predictors (all other columns when `predictors` is empty) out of `data`.
/// Poisson outcomes must be nonnegative integers.
PreparedData prepare_data(const NumericData& data, const std::string& outcome, Family family,
                          const std::vector<std::string>& predictors = {});

/// Seeded random split: round(n * test_fraction) rows held out, both index sets ascending.
struct Split {
    std::vector<Index> train;
    std::vector<Index> test;
};
Split train_test_split(Index n, double test_fraction, std::uint64_t seed);

struct FitConfig {
    std::filesystem::path data;
    std::string outcome;
    Family family = Family::linear;
    ErrorSpec error_spec;
    std::vector<std::string> predictors;
    std::vector<double> tau_grid{0.2, 0.6, 0.9};
    std::vector<double> delta_scale_grid{1.0};
    double gamma = 0.01;
    int iterations = 1000;
    int K = 8;
    std::uint64_t seed = 1;
    double test_fraction = 0.3;
    int lambda_count = 100;
    double lambda_ratio = 0.01;
    bool naive_lasso = true;
    int jobs = 1;

    void validate() const;
};

/// "error_spec" may be a path to a JSON file or an inline object.
void from_json(const nlohmann::json& j, FitConfig& cfg);
void to_json(nlohmann::json& j, const FitConfig& cfg);

struct FitColumn {
    std::string method;                 ///< "MEBoost" or "Lasso"
    std::optional<double> delta_scale;  ///< MEBoost only
    std::optional<double> tau;
    std::optional<double> lambda;
    double l1_norm = 0.0;
    double cv_loss = 0.0;               ///< mean held-out CV loss at the chosen tuning
    Vector beta;                        ///< standardized scale, over PreparedData::columns
    RawCoefficients raw;                ///< original predictor scale
    std::optional<double> deviance;     ///< on the test split
    std::optional<double> mse_m;        ///< on the test split
    bool variance_floored = false;
};

struct FitReport {
    Family family = Family::linear;
    std::string outcome;
    std::vector<std::string> predictors;
    std::vector<std::string> coefficient_names;  ///< PreparedData::columns
    Index n_train = 0;
    Index n_test = 0;
    std::uint64_t seed = 0;
    nlohmann::json config;
    std::vector<FitColumn> fits;  ///< MEBoost per (delta scale, tau), then the naive Lasso
};

/// The whole analysis on an already parsed table.
FitReport run_fit(const NumericData& data, const FitConfig& cfg);
FitReport run_fit(const FitConfig& cfg);

struct PathConfig {
    std::filesystem::path data;
    std::string outcome;
    Family family = Family::linear;
    ErrorSpec error_spec;
    std::vector<std::string> predictors;
    double delta_scale = 1.0;
    double tau = 1.0;
    double gamma = 0.01;
    int iterations = 1000;
};

void from_json(const nlohmann::json& j, PathConfig& cfg);

/// MEBoost path on all rows of `data`; column names come back in `columns`.
CoefficientPath run_path(const NumericData& data, const PathConfig& cfg, std::vector<std::string>* columns = nullptr);

} // namespace meboost

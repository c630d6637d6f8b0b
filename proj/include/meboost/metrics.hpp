#pragma once
#include <optional>
#include <span>
#include <vector>

#include <meboost/common.hpp>
#include <meboost/path.hpp>

namespace meboost {

struct FitMetrics {
    double mse = 0.0;          ///< held-out error on the true covariates
    double mse_m = 0.0;        ///< held-out error on the measured covariates
    double l1_dist = 0.0;      ///< |beta_hat - beta|_1
    double sensitivity = 0.0;
    double specificity = 0.0;
    double l1_norm = 0.0;      ///< |beta_hat|_1 at the evaluation point
};

/// Metrics of one coefficient vector on a test set. A coefficient counts as selected when it is
/// exactly nonzero. With no true zeros, specificity is reported as 1.
FitMetrics evaluate_fit(const Vector& beta_hat, const Vector& beta_true, const Matrix& X_test,
                        const Matrix& W_test, const Vector& Y_test);

/// evaluate_fit at every path step, interpolated onto `grid` metric by metric. Grid points the
/// path cannot reach (below its first L1 norm without a bracketing pair) are dropped, so every
/// returned entry has l1_norm equal to its grid value.
std::vector<FitMetrics> path_metrics_on_grid(const CoefficientPath& path, const Vector& beta_true,
                                             const Matrix& X_test, const Matrix& W_test,
                                             const Vector& Y_test, std::span<const double> grid);

/// Entry with the smallest mse_m; ties go to the smaller l1_norm.
FitMetrics select_min_mse_m(std::span<const FitMetrics> metrics);

/// Entry with the smallest mse; ties go to the smaller l1_norm.
FitMetrics select_min_mse(std::span<const FitMetrics> metrics);

struct MetricsSummary {
    FitMetrics mean;
    std::optional<FitMetrics> se;  ///< Monte Carlo standard errors; absent for a single replication
    std::size_t count = 0;
};

/// Componentwise mean and standard error sd / sqrt(m) over replications.
MetricsSummary aggregate_replications(std::span<const FitMetrics> replications);

} // namespace meboost

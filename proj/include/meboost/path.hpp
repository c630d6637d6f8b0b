#pragma once
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <meboost/common.hpp>
#include <meboost/corrected_score.hpp>

namespace meboost {

struct BoostConfig {
    double tau = 1.0;       ///< threshold fraction of the largest score component, in [0, 1]
    double gamma = 0.01;    ///< step size
    int iterations = 1000;  ///< T
    Family family = Family::linear;

    void validate() const;
};

struct PathStep {
    int t = 0;
    Vector beta;
    double l1 = 0.0;
    std::optional<double> sigma2;      ///< linear family only
    std::optional<double> lambda;      ///< set for penalty-indexed (Lasso) paths
    bool variance_floored = false;
};

enum class Termination { completed, stationary_point, score_divergence };

/// Ordered sequence of coefficient vectors with their L1 norms.
struct CoefficientPath {
    std::vector<PathStep> steps;
    Family family = Family::linear;
    std::optional<BoostConfig> config;
    Termination termination = Termination::completed;
    std::string termination_detail;

    Index dim() const { return steps.empty() ? 0 : steps.front().beta.size(); }
    bool any_variance_floored() const;
    std::vector<double> l1_norms() const;
};

/// Raised by threshold_set when every score component is exactly zero.
class StationaryPoint : public NumericalError {
public:
    StationaryPoint() : NumericalError("score vector is identically zero") {}
};

/// Indices j with |nu_j| >= tau * max|nu|, ascending.
std::vector<Index> threshold_set(const Vector& nu, double tau);

/// Thresholded path following along the measurement-error-corrected score.
///
/// Starts from beta = 0 (and sigma^2 = 1 for the linear family). Each iteration moves every
/// coordinate in the threshold set by gamma in the direction of its score sign; for the linear
/// family the corrected variance is then re-estimated. Every iteration is recorded, so a
/// completed path has iterations + 1 steps. A zero score or a Poisson overflow ends the path
/// early, with the reason stored in `termination`.
CoefficientPath meboost_path(const Matrix& W, const Vector& Y, const MeasurementErrorModel& err,
                             const BoostConfig& cfg);

/// Linear interpolation of a per-step statistic onto an L1-norm grid.
///
/// For grid value g the first consecutive pair of steps whose L1 norms bracket g is used.
/// Values past the last step's L1 norm repeat the last statistic; values with no bracketing
/// pair otherwise are nullopt.
std::vector<std::optional<double>> interpolate_path(std::span<const double> l1,
                                                    std::span<const double> grid,
                                                    std::span<const double> statistic);
std::vector<std::optional<double>> interpolate_path(const CoefficientPath& path,
                                                    std::span<const double> grid,
                                                    std::span<const double> statistic);

/// {0.05, 0.10, ..., 15.0}.
std::vector<double> default_l1_grid();

} // namespace meboost

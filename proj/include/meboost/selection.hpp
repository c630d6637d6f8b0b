#pragma once
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <meboost/cocolasso.hpp>
#include <meboost/common.hpp>
#include <meboost/corrected_score.hpp>
#include <meboost/path.hpp>
#include <meboost/quad_lasso.hpp>

namespace meboost {

using Fold = std::vector<Index>;

/// K disjoint index sets covering 0..n-1 after a seeded uniform shuffle; sizes differ by at most
/// one, larger folds first. Each set is sorted ascending.
std::vector<Fold> kfold_split(Index n, int K, std::uint64_t seed);

/// Complement of fold `k`, ascending.
Fold training_indices(Index n, const std::vector<Fold>& folds, int k);

/// 2 sum_i [ y_i log(y_i / mu_i) - (y_i - mu_i) ], with the y_i = 0 term equal to 2 mu_i.
double poisson_deviance(const Vector& Y, const Vector& mu);

/// Poisson deviance at mu = exp(eta), finite whenever eta is.
double poisson_deviance_from_eta(const Vector& Y, const Vector& eta);

/// Held-out loss per observation: mean squared error (linear) or mean deviance (Poisson).
double holdout_loss(const Matrix& W, const Vector& Y, const Vector& beta, Family family);

struct FoldCurve {
    int fold = 0;
    Fold test_indices;
    std::vector<double> tuning;  ///< L1 norm per path step (MEBoost) or lambda (Lasso)
    std::vector<double> loss;    ///< held-out loss per tuning value
    double best_tuning = 0.0;
    double best_loss = 0.0;
};

struct TauSummary {
    double tau = 0.0;
    double mean_l1 = 0.0;    ///< mean over folds of the loss-minimizing L1 norm
    double mean_loss = 0.0;  ///< mean over folds of the minimal loss
    std::vector<FoldCurve> folds;
};

struct CVResult {
    std::optional<double> chosen_tau;
    std::optional<double> chosen_l1_norm;
    std::optional<double> chosen_lambda;
    Vector final_beta;
    std::vector<FoldCurve> per_fold;        ///< folds of the chosen tau (MEBoost) or of the lambda grid
    std::vector<TauSummary> tau_summaries;  ///< MEBoost only, in tau-grid order
    std::vector<double> mean_loss;          ///< Lasso only, per lambda
    CoefficientPath refit_path;             ///< full-data path at the chosen tau / over the lambda grid
    std::size_t final_step = 0;             ///< index into refit_path.steps
};

struct CVOptions {
    int K = 5;
    std::uint64_t seed = 1;
    int jobs = 1;
};

/// Cross-validated MEBoost: per tau and fold, the held-out loss at every path step; the tau with
/// the smallest mean minimal loss wins; the full-data path at that tau is cut at the step whose
/// L1 norm is closest to the mean minimizing L1 norm (ties: earlier step). cfg.tau is ignored.
CVResult cv_select_meboost(const Matrix& W, const Vector& Y, const MeasurementErrorModel& err,
                           std::span<const double> tau_grid, const BoostConfig& cfg,
                           const CVOptions& opts = {});

enum class LassoMethod { naive, cocolasso };

std::string_view to_string(LassoMethod method);

struct LassoCVSettings {
    LassoMethod method = LassoMethod::naive;
    Family family = Family::linear;  ///< poisson requires method naive
    Vector penalty_factor;           ///< naive only; empty = all ones
    double tol = kDefaultLassoTol;
    int max_sweeps = kDefaultLassoMaxSweeps;
    ProjectionOptions projection;
};

/// K-fold CV over a strictly decreasing lambda grid; the lambda with the smallest mean held-out
/// loss wins (ties: larger lambda) and the full-data path over the grid is returned with it.
/// `err` is used by the CoCoLasso only.
CVResult cv_select_lasso(const Matrix& W, const Vector& Y, const MeasurementErrorModel& err,
                         std::span<const double> lambdas, const LassoCVSettings& settings,
                         const CVOptions& opts = {});

/// Lambda path of one Lasso variant on (W, Y).
LassoPath fit_lasso_path(const Matrix& W, const Vector& Y, const MeasurementErrorModel& err,
                         std::span<const double> lambdas, const LassoCVSettings& settings);

} // namespace meboost

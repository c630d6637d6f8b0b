#pragma once
#include <optional>
#include <span>
#include <vector>

#include <meboost/common.hpp>
#include <meboost/corrected_score.hpp>
#include <meboost/quad_lasso.hpp>

namespace meboost {

struct ProjectionOptions {
    double eps_pd = 1e-4;   ///< eigenvalue floor of the target cone
    double tol = 1e-4;      ///< required gap between the achieved and the certified distance
    int max_iter = 20000;   ///< splitting iterations before giving up
};

struct ProjectionDiagnostics {
    bool fast_path = false;        ///< input already had min eigenvalue >= eps_pd
    int iterations = 0;
    double distance = 0.0;         ///< achieved ||M - Sigma_hat||_max
    double lower_bound = 0.0;      ///< certified lower bound on the optimal distance
    double min_eigenvalue = 0.0;   ///< of the returned matrix
    double input_min_eigenvalue = 0.0;
    double penalty = 0.0;          ///< final splitting penalty
    int penalty_updates = 0;
    int accelerated_steps = 0;     ///< extrapolated steps kept
    int safeguard_resets = 0;      ///< extrapolations rejected in favour of a plain step
};

/// Raised when the gap is still above tol after max_iter iterations.
class ProjectionFailure : public NumericalError {
public:
    ProjectionFailure(const std::string& message, ProjectionDiagnostics diagnostics)
        : NumericalError(message), diagnostics_(std::move(diagnostics)) {}
    const ProjectionDiagnostics& diagnostics() const noexcept { return diagnostics_; }

private:
    ProjectionDiagnostics diagnostics_;
};

struct ProjectionResult {
    Matrix matrix;
    ProjectionDiagnostics diagnostics;
};

/// Nearest matrix with min eigenvalue >= eps_pd in the elementwise max norm.
///
/// Solves min ||M - Sigma_hat||_max over M >= eps_pd I by alternating-direction splitting
/// (cone projection by eigenvalue clipping, max-norm prox by L1-ball projection), with residual
/// balancing of the penalty and Anderson extrapolation. Each iteration yields
///  - an upper bound: the cone iterate M is feasible at radius ||M - Sigma_hat||_max, and
///  - a lower bound: its cone correction G is PSD, and any PSD G certifies
///    r* >= <G, eps_pd I - Sigma_hat> / ||G||_1.
/// Iteration stops once the bounds are within tol; the returned matrix attains the upper bound.
ProjectionResult nearest_pd_projection(const Matrix& sigma_hat, const ProjectionOptions& opts = {});

enum class Feasibility { feasible, infeasible, undecided };

struct FeasibilityProbe {
    Feasibility outcome = Feasibility::undecided;
    int iterations = 0;
    double upper = 0.0;   ///< smallest radius attained by a cone iterate
    double lower = 0.0;   ///< largest certified lower bound on the optimal radius
    Matrix witness;       ///< cone iterate attaining `upper`
};

/// Does { M : ||M - Sigma_hat||_max <= radius } meet { M : M >= eps_pd I }?
///
/// Dykstra's alternating projections between the box and the cone. Feasible once a cone iterate
/// lies within radius + slack, infeasible once a certificate exceeds the radius.
FeasibilityProbe probe_feasibility(const Matrix& sigma_hat, double radius, double eps_pd,
                                   double slack, int max_iter);

struct CorrectedMoments {
    Matrix sigma_hat;   ///< W'W/n - Delta, possibly indefinite
    Vector rho_tilde;   ///< W'Y/n
    std::optional<Matrix> projected;
    std::optional<ProjectionDiagnostics> diagnostics;
};

CorrectedMoments corrected_moments(const Matrix& W, const Vector& Y, const MeasurementErrorModel& err);

struct CocoLassoFit {
    CorrectedMoments moments;
    LassoPath path;
};

/// Projects the corrected covariance once, then solves the quadratic Lasso over `lambdas`.
CocoLassoFit cocolasso_fit(const Matrix& W, const Vector& Y, const MeasurementErrorModel& err,
                           std::span<const double> lambdas, double tol = kDefaultLassoTol,
                           int max_sweeps = kDefaultLassoMaxSweeps,
                           const ProjectionOptions& opts = {});

LassoPath cocolasso_path(const Matrix& W, const Vector& Y, const MeasurementErrorModel& err,
                         std::span<const double> lambdas, double tol = kDefaultLassoTol,
                         int max_sweeps = kDefaultLassoMaxSweeps, const ProjectionOptions& opts = {});

} // namespace meboost

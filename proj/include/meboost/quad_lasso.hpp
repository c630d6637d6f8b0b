#pragma once
#include <span>
#include <vector>

#include <meboost/common.hpp>
#include <meboost/path.hpp>

namespace meboost {

/// min_beta  1/2 beta' Sigma beta - rho' beta + lambda * sum_j w_j |beta_j|
///
/// `penalty_factor` (w) is optional; empty means every coordinate is penalized with weight 1.
struct QuadProblem {
    Matrix sigma;
    Vector rho;
    double lambda = 0.0;
    Vector penalty_factor;

    Index dim() const noexcept { return rho.size(); }
    double weight(Index j) const { return penalty_factor.size() == 0 ? 1.0 : penalty_factor(j); }
    /// Symmetric to 1e-10, PSD up to -1e-8, lambda >= 0.
    void validate() const;
};

struct CDResult {
    Vector beta;
    int sweeps = 0;
    bool converged = false;
    std::vector<Index> frozen;            ///< coordinates with Sigma_jj = 0, held at 0
    std::vector<double> objective_trace;  ///< objective after each sweep, when tracked
};

double soft_threshold(double z, double threshold) noexcept;

double quad_objective(const QuadProblem& prob, const Vector& beta);

/// Largest KKT violation at `beta`: |grad_j + lambda w_j sign(beta_j)| on the support,
/// max(|grad_j| - lambda w_j, 0) off it.
double kkt_residual(const QuadProblem& prob, const Vector& beta);

/// Cyclic coordinate descent; sweeps stop once the largest coordinate change is <= tol.
///
/// Hitting max_sweeps is not an error: the result carries converged = false. In debug builds
/// the objective is asserted non-increasing across sweeps.
CDResult coordinate_descent_quadratic(const QuadProblem& prob, const Vector& init, double tol,
                                      int max_sweeps, bool track_objective = false);

struct LassoSolution {
    double lambda = 0.0;
    Vector beta;
    int sweeps = 0;
    bool converged = true;
};

using LassoPath = std::vector<LassoSolution>;

inline constexpr double kDefaultLassoTol = 1e-7;
inline constexpr int kDefaultLassoMaxSweeps = 10000;

/// Warm-started solves of the quadratic problem over a strictly decreasing lambda sequence.
LassoPath quadratic_lasso_path(const Matrix& sigma, const Vector& rho, std::span<const double> lambdas,
                               double tol = kDefaultLassoTol, int max_sweeps = kDefaultLassoMaxSweeps,
                               const Vector& penalty_factor = Vector());

/// Lasso on the observed covariates with 1/n-scaled moments: Sigma = W'W/n, rho = W'Y/n.
LassoPath naive_lasso_path(const Matrix& W, const Vector& Y, std::span<const double> lambdas,
                           double tol = kDefaultLassoTol, int max_sweeps = kDefaultLassoMaxSweeps);

/// max_j |W'Y|_j / n, the smallest lambda giving the zero solution.
double naive_lambda_max(const Matrix& W, const Vector& Y);

/// Geometric sequence from lambda_max to lambda_max * ratio, `count` points.
std::vector<double> lambda_grid(double lambda_max, int count, double ratio);

/// View a lambda path as a CoefficientPath (step t = lambda index).
CoefficientPath to_coefficient_path(const LassoPath& path, Family family = Family::linear);

/// Poisson log-linear Lasso via proximal Newton (IRLS outer loop, coordinate descent inner).
///
/// Minimizes n^-1 sum_i [exp(w_i'beta) - y_i w_i'beta] + lambda sum_j w_j |beta_j|, warm
/// started down the lambda sequence. Coordinates with penalty factor 0 are unpenalized.
LassoPath poisson_lasso_path(const Matrix& W, const Vector& Y, std::span<const double> lambdas,
                             const Vector& penalty_factor = Vector(), double tol = 1e-6,
                             int max_sweeps = kDefaultLassoMaxSweeps);

/// Smallest lambda at which every penalized Poisson coefficient is zero.
double poisson_lambda_max(const Matrix& W, const Vector& Y, const Vector& penalty_factor = Vector());

} // namespace meboost

#include <meboost/quad_lasso.hpp>

#include <cmath>

#include <meboost/corrected_score.hpp>

namespace meboost {
namespace {

constexpr double kEtaCap = 50.0;  // exp(50) ~ 5e21: far past any sensible count model
constexpr int kMaxNewtonSteps = 100;

double penalized_objective(const Matrix& W, const Vector& Y, const Vector& beta, double lambda,
                           const Vector& pf)
{
    const Vector eta = (W * beta).cwiseMin(kEtaCap);
    double loss = (eta.array().exp() - Y.array() * eta.array()).sum() / static_cast<double>(W.rows());
    double penalty = 0.0;
    for (Index j = 0; j < beta.size(); ++j)
        penalty += (pf.size() == 0 ? 1.0 : pf(j)) * std::abs(beta(j));
    return loss + lambda * penalty;
}

// One lambda: proximal Newton with step halving on the penalized objective.
LassoSolution solve_poisson(const Matrix& W, const Vector& Y, double lambda, const Vector& pf,
                            Vector beta, double tol, int max_sweeps)
{
    const auto n = static_cast<double>(W.rows());
    LassoSolution sol{lambda, beta, 0, false};
    double current = penalized_objective(W, Y, beta, lambda, pf);
    for (int step = 0; step < kMaxNewtonSteps; ++step) {
        const Vector mu = (W * beta).cwiseMin(kEtaCap).array().exp();
        const Vector grad = W.transpose() * (mu - Y) / n;
        Matrix hess = W.transpose() * mu.asDiagonal() * W / n;
        hess = 0.5 * (hess + hess.transpose());
        QuadProblem quad{hess, hess * beta - grad, lambda, pf};
        auto cd = coordinate_descent_quadratic(quad, beta, tol * 0.1, max_sweeps);
        sol.sweeps += cd.sweeps;

        Vector candidate = cd.beta;
        double t = 1.0;
        double next = penalized_objective(W, Y, candidate, lambda, pf);
        while (next > current + 1e-12 * std::abs(current) && t > 1e-6) {
            t *= 0.5;
            candidate = beta + t * (cd.beta - beta);
            next = penalized_objective(W, Y, candidate, lambda, pf);
        }
        const double change = (candidate - beta).cwiseAbs().maxCoeff();
        beta = candidate;
        current = next;
        if (change <= tol) {
            sol.converged = cd.converged;
            break;
        }
    }
    sol.beta = std::move(beta);
    return sol;
}

// Only unpenalized coordinates move when lambda is effectively infinite.
Vector null_fit(const Matrix& W, const Vector& Y, const Vector& pf)
{
    bool any_free = false;
    for (Index j = 0; j < pf.size(); ++j) any_free = any_free || pf(j) == 0.0;
    if (!any_free) return Vector::Zero(W.cols());
    return solve_poisson(W, Y, 1e100, pf, Vector::Zero(W.cols()), 1e-10, 1000).beta;
}

} // namespace

double poisson_lambda_max(const Matrix& W, const Vector& Y, const Vector& penalty_factor)
{
    detail::require_rows(W, Y, "poisson_lambda_max");
    detail::check_counts(Y, "poisson_lambda_max");
    const Index p = W.cols();
    if (penalty_factor.size() != 0)
        detail::require(penalty_factor.size() == p, "penalty_factor must have length p");

    const Vector beta = null_fit(W, Y, penalty_factor);
    const Vector mu = (W * beta).cwiseMin(kEtaCap).array().exp();
    const Vector grad = W.transpose() * (Y - mu) / static_cast<double>(W.rows());
    double lmax = 0.0;
    for (Index j = 0; j < p; ++j) {
        const double w = penalty_factor.size() == 0 ? 1.0 : penalty_factor(j);
        if (w > 0.0) lmax = std::max(lmax, std::abs(grad(j)) / w);
    }
    return lmax;
}

LassoPath poisson_lasso_path(const Matrix& W, const Vector& Y, std::span<const double> lambdas,
                             const Vector& penalty_factor, double tol, int max_sweeps)
{
    detail::require_rows(W, Y, "poisson_lasso_path");
    detail::check_counts(Y, "poisson_lasso_path");
    detail::require(!lambdas.empty(), "poisson_lasso_path: empty lambda sequence");
    for (std::size_t k = 1; k < lambdas.size(); ++k)
        detail::require(lambdas[k] < lambdas[k - 1], "poisson_lasso_path: lambdas must be strictly decreasing");
    if (penalty_factor.size() != 0)
        detail::require(penalty_factor.size() == W.cols(), "penalty_factor must have length p");

    LassoPath path;
    path.reserve(lambdas.size());
    Vector beta = null_fit(W, Y, penalty_factor);
    for (double lambda : lambdas) {
        auto sol = solve_poisson(W, Y, lambda, penalty_factor, beta, tol, max_sweeps);
        beta = sol.beta;
        path.push_back(std::move(sol));
    }
    return path;
}

} // namespace meboost

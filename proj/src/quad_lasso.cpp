#include <meboost/quad_lasso.hpp>

#include <cassert>
#include <cmath>

#include <fmt/format.h>

namespace meboost {
namespace {

void validate_shape(const QuadProblem& prob)
{
    const Index p = prob.rho.size();
    detail::require_square(prob.sigma, p, "Sigma", "QuadProblem");
    detail::require(prob.lambda >= 0.0 && std::isfinite(prob.lambda), "lambda must be nonnegative");
    if (prob.penalty_factor.size() != 0) {
        detail::require(prob.penalty_factor.size() == p, "penalty_factor must have length p");
        detail::require(prob.penalty_factor.minCoeff() >= 0.0, "penalty factors must be nonnegative");
    }
}

void check_decreasing(std::span<const double> lambdas, std::string_view where)
{
    detail::require(!lambdas.empty(), fmt::format("{}: empty lambda sequence", where));
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        detail::require(lambdas[k] > 0.0, fmt::format("{}: lambdas must be positive", where));
        if (k > 0)
            detail::require(lambdas[k] < lambdas[k - 1],
                            fmt::format("{}: lambdas must be strictly decreasing", where));
    }
}

} // namespace

void QuadProblem::validate() const
{
    validate_shape(*this);
    if (rho.size() == 0) return;
    detail::require((sigma - sigma.transpose()).cwiseAbs().maxCoeff() <= 1e-10,
                    "QuadProblem: Sigma must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("QuadProblem: eigenvalue solver failed");
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw InvalidArgument(fmt::format("QuadProblem: Sigma is not PSD (min eigenvalue {:.3e})",
                                          es.eigenvalues().minCoeff()));
}

double soft_threshold(double z, double threshold) noexcept
{
    if (z > threshold) return z - threshold;
    if (z < -threshold) return z + threshold;
    return 0.0;
}

double quad_objective(const QuadProblem& prob, const Vector& beta)
{
    double penalty = 0.0;
    for (Index j = 0; j < beta.size(); ++j) penalty += prob.weight(j) * std::abs(beta(j));
    return 0.5 * beta.dot(prob.sigma * beta) - prob.rho.dot(beta) + prob.lambda * penalty;
}

double kkt_residual(const QuadProblem& prob, const Vector& beta)
{
    const Vector grad = prob.sigma * beta - prob.rho;
    double worst = 0.0;
    for (Index j = 0; j < beta.size(); ++j) {
        if (prob.sigma(j, j) <= 0.0) continue;
        const double lam = prob.lambda * prob.weight(j);
        const double v = beta(j) != 0.0 ? std::abs(grad(j) + lam * (beta(j) > 0.0 ? 1.0 : -1.0))
                                        : std::max(std::abs(grad(j)) - lam, 0.0);
        worst = std::max(worst, v);
    }
    return worst;
}

CDResult coordinate_descent_quadratic(const QuadProblem& prob, const Vector& init, double tol,
                                      int max_sweeps, bool track_objective)
{
    validate_shape(prob);
    const Index p = prob.dim();
    detail::require(init.size() == p, "coordinate_descent_quadratic: init has wrong length");
    detail::require(tol > 0.0, "coordinate_descent_quadratic: tol must be positive");
    detail::require(max_sweeps > 0, "coordinate_descent_quadratic: max_sweeps must be positive");

    CDResult out;
    out.beta = init;
    for (Index j = 0; j < p; ++j) {
        if (prob.sigma(j, j) <= 0.0) {
            out.frozen.push_back(j);
            out.beta(j) = 0.0;
        }
    }
    Vector grad = prob.sigma * out.beta;  // running Sigma * beta

#ifndef NDEBUG
    double previous = quad_objective(prob, out.beta);
#endif
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        double largest = 0.0;
        for (Index j = 0; j < p; ++j) {
            const double sjj = prob.sigma(j, j);
            if (sjj <= 0.0) continue;
            const double old = out.beta(j);
            const double z = prob.rho(j) - (grad(j) - sjj * old);
            const double updated = soft_threshold(z, prob.lambda * prob.weight(j)) / sjj;
            const double change = updated - old;
            if (change != 0.0) {
                grad.noalias() += change * prob.sigma.col(j);
                out.beta(j) = updated;
                largest = std::max(largest, std::abs(change));
            }
        }
        out.sweeps = sweep;
        if (track_objective) out.objective_trace.push_back(quad_objective(prob, out.beta));
#ifndef NDEBUG
        const double current = quad_objective(prob, out.beta);
        assert(current <= previous + 1e-10 * (1.0 + std::abs(previous)));
        previous = current;
#endif
        if (largest <= tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

LassoPath quadratic_lasso_path(const Matrix& sigma, const Vector& rho, std::span<const double> lambdas,
                               double tol, int max_sweeps, const Vector& penalty_factor)
{
    check_decreasing(lambdas, "quadratic_lasso_path");
    QuadProblem prob{sigma, rho, lambdas.front(), penalty_factor};
    prob.validate();

    LassoPath path;
    path.reserve(lambdas.size());
    Vector beta = Vector::Zero(rho.size());
    for (double lambda : lambdas) {
        prob.lambda = lambda;
        auto res = coordinate_descent_quadratic(prob, beta, tol, max_sweeps);
        beta = res.beta;
        path.push_back(LassoSolution{lambda, std::move(res.beta), res.sweeps, res.converged});
    }
    return path;
}

double naive_lambda_max(const Matrix& W, const Vector& Y)
{
    detail::require_rows(W, Y, "naive_lambda_max");
    detail::require(W.rows() > 0 && W.cols() > 0, "naive_lambda_max: empty design");
    return (W.transpose() * Y).cwiseAbs().maxCoeff() / static_cast<double>(W.rows());
}

LassoPath naive_lasso_path(const Matrix& W, const Vector& Y, std::span<const double> lambdas,
                           double tol, int max_sweeps)
{
    detail::require_rows(W, Y, "naive_lasso_path");
    const auto n = static_cast<double>(W.rows());
    Matrix sigma = W.transpose() * W / n;
    sigma = 0.5 * (sigma + sigma.transpose());
    const Vector rho = W.transpose() * Y / n;
    return quadratic_lasso_path(sigma, rho, lambdas, tol, max_sweeps);
}

std::vector<double> lambda_grid(double lambda_max, int count, double ratio)
{
    detail::require(lambda_max > 0.0 && std::isfinite(lambda_max), "lambda_max must be positive");
    detail::require(count >= 2, "lambda grid needs at least 2 points");
    detail::require(ratio > 0.0 && ratio < 1.0, "lambda grid ratio must lie in (0, 1)");
    std::vector<double> grid(static_cast<std::size_t>(count));
    const double log_step = std::log(ratio) / static_cast<double>(count - 1);
    for (int k = 0; k < count; ++k) grid[static_cast<std::size_t>(k)] = lambda_max * std::exp(log_step * k);
    grid.front() = lambda_max;
    grid.back() = lambda_max * ratio;
    return grid;
}

CoefficientPath to_coefficient_path(const LassoPath& lasso, Family family)
{
    CoefficientPath path;
    path.family = family;
    path.steps.reserve(lasso.size());
    int t = 0;
    for (const auto& sol : lasso) {
        PathStep step;
        step.t = t++;
        step.beta = sol.beta;
        step.l1 = sol.beta.lpNorm<1>();
        step.lambda = sol.lambda;
        path.steps.push_back(std::move(step));
    }
    return path;
}

} // namespace meboost

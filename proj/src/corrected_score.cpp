#include <meboost/corrected_score.hpp>

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace meboost {

void MeasurementErrorModel::validate() const
{
    detail::require(delta.rows() == delta.cols(), "measurement error covariance must be square");
    if (delta.size() == 0) return;
    detail::require((delta - delta.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
                    "measurement error covariance must be symmetric");
    detail::require(delta.diagonal().minCoeff() >= 0.0,
                    "measurement error variances must be nonnegative");
}

namespace detail {

void check_linear_inputs(const Matrix& W, const Vector& Y, const Vector& beta, std::string_view where)
{
    require_rows(W, Y, where);
    require_cols(W, beta.size(), "beta", where);
}

void check_counts(const Vector& Y, std::string_view where)
{
    for (Index i = 0; i < Y.size(); ++i) {
        if (!(Y(i) >= 0.0) || std::floor(Y(i)) != Y(i))
            throw InvalidArgument(fmt::format("{}: Y[{}] = {} is not a nonnegative integer", where,
                                              i, Y(i)));
    }
}

} // namespace detail

namespace {

void check_error_model(const MeasurementErrorModel& err, Index p, std::string_view where)
{
    detail::require_square(err.delta, p, "delta", where);
}

} // namespace

Vector naive_score_linear(const Matrix& W, const Vector& Y, const Vector& beta, double sigma2)
{
    detail::check_linear_inputs(W, Y, beta, "naive_score_linear");
    detail::require(sigma2 > 0.0, "naive_score_linear: sigma2 must be positive");
    const Vector residual = Y - W * beta;
    return W.transpose() * residual / sigma2;
}

Vector corrected_score_linear(const Matrix& W, const Vector& Y, const Vector& beta, double sigma2,
                              const MeasurementErrorModel& err)
{
    check_error_model(err, beta.size(), "corrected_score_linear");
    const auto n = static_cast<double>(W.rows());
    return naive_score_linear(W, Y, beta, sigma2) + (n / sigma2) * (err.delta * beta);
}

double corrected_variance_raw(const Matrix& W, const Vector& Y, const Vector& beta,
                              const MeasurementErrorModel& err)
{
    detail::check_linear_inputs(W, Y, beta, "corrected_variance_linear");
    check_error_model(err, beta.size(), "corrected_variance_linear");
    detail::require(W.rows() > 0, "corrected_variance_linear: no observations");
    const Vector residual = Y - W * beta;
    return residual.squaredNorm() / static_cast<double>(W.rows()) - beta.dot(err.delta * beta);
}

double corrected_variance_linear(const Matrix& W, const Vector& Y, const Vector& beta,
                                 const MeasurementErrorModel& err)
{
    return std::max(corrected_variance_raw(W, Y, beta, err), kVarianceFloor);
}

double corrected_loglik_linear(const Matrix& W, const Vector& Y, const Vector& beta, double sigma,
                               const MeasurementErrorModel& err)
{
    detail::check_linear_inputs(W, Y, beta, "corrected_loglik_linear");
    check_error_model(err, beta.size(), "corrected_loglik_linear");
    detail::require(sigma > 0.0, "corrected_loglik_linear: sigma must be positive");
    const auto n = static_cast<double>(W.rows());
    const Vector residual = Y - W * beta;
    const double correction = beta.dot(err.delta * beta);
    return -0.5 * n * std::log(2.0 * std::numbers::pi) - n * std::log(sigma) -
           (residual.squaredNorm() - n * correction) / (2.0 * sigma * sigma);
}

Vector corrected_score_poisson(const Matrix& W, const Vector& Y, const Vector& beta,
                               const MeasurementErrorModel& err)
{
    detail::check_linear_inputs(W, Y, beta, "corrected_score_poisson");
    check_error_model(err, beta.size(), "corrected_score_poisson");
    detail::check_counts(Y, "corrected_score_poisson");

    const Vector delta_beta = err.delta * beta;
    const double half_quad = 0.5 * beta.dot(delta_beta);
    const Vector exponent = (W * beta).array() - half_quad;
    for (Index k = 0; k < exponent.size(); ++k) {
        if (!(exponent(k) <= kPoissonExponentLimit)) throw ScoreDivergence(k, exponent(k));
    }
    const Vector mu = exponent.array().exp();
    // sum_k y_k w_k - sum_k mu_k w_k + (sum_k mu_k) Delta beta
    return W.transpose() * (Y - mu) + mu.sum() * delta_beta;
}

double reliability_to_error_variance(double rho)
{
    detail::require(rho > 0.0 && rho <= 1.0, "reliability correlation must lie in (0, 1]");
    return 1.0 - rho * rho;
}

} // namespace meboost

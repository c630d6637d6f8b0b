#pragma once
#include <meboost/common.hpp>

namespace meboost {

/// Floor applied to the corrected residual variance, which can go negative under heavy correction.
inline constexpr double kVarianceFloor = 1e-4;

/// Largest exponent the Poisson corrected score evaluates before reporting divergence.
inline constexpr double kPoissonExponentLimit = 700.0;

/// Assumed covariance of the additive measurement error, W = X + U with Cov(U) = delta.
struct MeasurementErrorModel {
    Matrix delta;

    /// No measurement error on any of `p` covariates.
    static MeasurementErrorModel none(Index p) { return {Matrix::Zero(p, p)}; }

    Index dim() const noexcept { return delta.rows(); }
    /// Square, symmetric to 1e-12, nonnegative diagonal.
    void validate() const;
};

struct ModelState {
    Vector beta;
    double sigma2 = 1.0;
};

/// sigma^-2 (W'Y - W'W beta).
Vector naive_score_linear(const Matrix& W, const Vector& Y, const Vector& beta, double sigma2);

/// Naive score plus the correction n sigma^-2 Delta beta; unbiased for the true-covariate score.
Vector corrected_score_linear(const Matrix& W, const Vector& Y, const Vector& beta, double sigma2,
                              const MeasurementErrorModel& err);

/// n^-1 |Y - W beta|^2 - beta' Delta beta, without flooring.
double corrected_variance_raw(const Matrix& W, const Vector& Y, const Vector& beta,
                              const MeasurementErrorModel& err);

/// max(corrected_variance_raw, kVarianceFloor).
double corrected_variance_linear(const Matrix& W, const Vector& Y, const Vector& beta,
                                 const MeasurementErrorModel& err);

/// Corrected normal log-likelihood at (beta, sigma).
double corrected_loglik_linear(const Matrix& W, const Vector& Y, const Vector& beta, double sigma,
                               const MeasurementErrorModel& err);

/// sum_k [ y_k w_k - (w_k - Delta beta) exp(beta'w_k - beta'Delta beta / 2) ].
///
/// Throws ScoreDivergence naming the first row whose exponent exceeds kPoissonExponentLimit.
Vector corrected_score_poisson(const Matrix& W, const Vector& Y, const Vector& beta,
                               const MeasurementErrorModel& err);

/// Error variance of a standardized covariate whose correlation with the truth is `rho`: 1 - rho^2.
double reliability_to_error_variance(double rho);

namespace detail {
void check_linear_inputs(const Matrix& W, const Vector& Y, const Vector& beta, std::string_view where);
void check_counts(const Vector& Y, std::string_view where);
} // namespace detail

} // namespace meboost

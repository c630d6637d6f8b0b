#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <meboost/corrected_score.hpp>
#include <meboost/datagen.hpp>

#include "oracles.hpp"

using namespace meboost;

namespace {

Matrix col(std::initializer_list<double> v)
{
    Matrix m(static_cast<Index>(v.size()), 1);
    Index i = 0;
    for (double x : v) m(i++, 0) = x;
    return m;
}

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

MeasurementErrorModel scalar_error(double d)
{
    return {Matrix::Constant(1, 1, d)};
}

// Random PSD Delta with modest entries.
Matrix random_delta(Index p, std::uint64_t seed)
{
    const Matrix A = oracle::gaussian(p, p, seed) * 0.3;
    return A * A.transpose();
}

} // namespace

TEST(NaiveScoreLinear, HandExample)
{
    const Vector s = naive_score_linear(col({1, 2}), vec({1, 3}), vec({1}), 1.0);
    EXPECT_DOUBLE_EQ(s(0), 2.0);
}

TEST(NaiveScoreLinear, ZeroBetaAndSigmaScaling)
{
    const Matrix W = oracle::gaussian(10, 3, 1);
    const Vector Y = oracle::gaussian(10, 1, 2);
    EXPECT_TRUE(naive_score_linear(W, Y, Vector::Zero(3), 2.0).isApprox(W.transpose() * Y / 2.0));
    const Vector b = vec({0.3, -1.0, 2.0});
    EXPECT_TRUE(naive_score_linear(W, Y, b, 4.0).isApprox(0.25 * naive_score_linear(W, Y, b, 1.0), 1e-14));
}

TEST(NaiveScoreLinear, Errors)
{
    EXPECT_THROW(naive_score_linear(col({1, 2}), vec({1}), vec({1}), 1.0), InvalidArgument);
    EXPECT_THROW(naive_score_linear(col({1, 2}), vec({1, 2}), vec({1, 1}), 1.0), InvalidArgument);
    EXPECT_THROW(naive_score_linear(col({1, 2}), vec({1, 2}), vec({1}), 0.0), InvalidArgument);
    EXPECT_THROW(naive_score_linear(col({1, 2}), vec({1, 2}), vec({1}), -1.0), InvalidArgument);
}

TEST(CorrectedScoreLinear, HandExample)
{
    const Vector s = corrected_score_linear(col({1, 2}), vec({1, 3}), vec({1}), 1.0, scalar_error(0.5));
    EXPECT_DOUBLE_EQ(s(0), 3.0);
}

TEST(CorrectedScoreLinear, ReducesToNaive)
{
    const Matrix W = oracle::gaussian(12, 4, 3);
    const Vector Y = oracle::gaussian(12, 1, 4);
    const Vector b = oracle::gaussian(4, 1, 5);
    EXPECT_EQ(corrected_score_linear(W, Y, b, 1.3, MeasurementErrorModel::none(4)),
              naive_score_linear(W, Y, b, 1.3));
    const MeasurementErrorModel err{random_delta(4, 6)};
    EXPECT_EQ(corrected_score_linear(W, Y, Vector::Zero(4), 1.3, err),
              naive_score_linear(W, Y, Vector::Zero(4), 1.3));
}

TEST(CorrectedScoreLinear, DeltaDimensionChecked)
{
    EXPECT_THROW(corrected_score_linear(col({1, 2}), vec({1, 3}), vec({1}), 1.0,
                                        MeasurementErrorModel::none(2)),
                 InvalidArgument);
}

TEST(CorrectedScoreLinear, AffineInYAndDelta)
{
    const Matrix W = oracle::gaussian(15, 3, 7);
    const Vector Y1 = oracle::gaussian(15, 1, 8);
    const Vector Y2 = oracle::gaussian(15, 1, 9);
    const Vector b = oracle::gaussian(3, 1, 10);
    const MeasurementErrorModel e1{random_delta(3, 11)};
    const MeasurementErrorModel e2{random_delta(3, 12)};
    const double a = 0.3;
    const auto s = [&](const Vector& Y, const Matrix& D) {
        return corrected_score_linear(W, Y, b, 0.7, MeasurementErrorModel{D});
    };
    const Vector y_mix = a * Y1 + (1 - a) * Y2;
    EXPECT_TRUE(s(y_mix, e1.delta).isApprox(a * s(Y1, e1.delta) + (1 - a) * s(Y2, e1.delta), 1e-12));
    const Matrix d_mix = a * e1.delta + (1 - a) * e2.delta;
    EXPECT_TRUE(s(Y1, d_mix).isApprox(a * s(Y1, e1.delta) + (1 - a) * s(Y1, e2.delta), 1e-12));
}

TEST(CorrectedScoreLinear, MatchesLoglikGradient)
{
    for (std::uint64_t draw = 0; draw < 100; ++draw) {
        const Index p = 1 + static_cast<Index>(draw % 5);
        const Index n = 8 + static_cast<Index>(draw % 7);
        const Matrix W = oracle::gaussian(n, p, 1000 + draw);
        const Vector Y = oracle::gaussian(n, 1, 2000 + draw);
        const Vector b = oracle::gaussian(p, 1, 3000 + draw);
        const MeasurementErrorModel err{random_delta(p, 4000 + draw)};
        const double sigma = 0.5 + 0.01 * static_cast<double>(draw);
        const Vector fd = oracle::gradient(
            [&](const Vector& x) { return corrected_loglik_linear(W, Y, x, sigma, err); }, b, 1e-6);
        const Vector s = corrected_score_linear(W, Y, b, sigma * sigma, err);
        EXPECT_LE((fd - s).norm(), 1e-6 * std::max(1.0, s.norm())) << "draw " << draw;
    }
}

TEST(CorrectedScoreLinear, UnbiasedOverMeasurementError)
{
    const Index n = 20;
    const Index p = 3;
    const Matrix X = oracle::gaussian(n, p, 21);
    const Vector Y = oracle::gaussian(n, 1, 22);
    const Vector b = vec({0.5, -0.4, 0.8});
    Matrix delta(3, 3);
    delta << 0.5, 0.1, 0.0, 0.1, 0.4, 0.05, 0.0, 0.05, 0.3;
    const MeasurementErrorModel err{delta};
    const Vector target = naive_score_linear(X, Y, b, 1.0);
    const auto mc = oracle::monte_carlo(20000, [&](int i) {
        const Matrix U = sample_mvn(n, delta, 500000 + static_cast<std::uint64_t>(i));
        return Vector(corrected_score_linear(X + U, Y, b, 1.0, err));
    });
    for (Index j = 0; j < p; ++j) EXPECT_LE(std::abs(mc.mean(j) - target(j)), 3.0 * mc.se(j)) << j;
}

TEST(CorrectedVariance, Examples)
{
    const Matrix W = oracle::gaussian(9, 2, 31);
    const Vector Y = oracle::gaussian(9, 1, 32);
    const MeasurementErrorModel err{random_delta(2, 33)};
    EXPECT_NEAR(corrected_variance_linear(W, Y, Vector::Zero(2), err), Y.squaredNorm() / 9.0, 1e-15);
    EXPECT_DOUBLE_EQ(corrected_variance_raw(col({1, 2}), vec({1, 3}), vec({1}), scalar_error(0.5)), 0.0);
    EXPECT_DOUBLE_EQ(corrected_variance_linear(col({1, 2}), vec({1, 3}), vec({1}), scalar_error(0.5)),
                     kVarianceFloor);
}

TEST(CorrectedVariance, ZeroDeltaIsMleAtOls)
{
    const Matrix W = oracle::gaussian(30, 3, 41);
    const Vector Y = oracle::gaussian(30, 1, 42);
    const Vector ols = W.colPivHouseholderQr().solve(Y);
    const double mle = (Y - W * ols).squaredNorm() / 30.0;
    EXPECT_NEAR(corrected_variance_linear(W, Y, ols, MeasurementErrorModel::none(3)), mle, 1e-13);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Vector b = oracle::gaussian(3, 1, 50 + s);
        EXPECT_GE(corrected_variance_raw(W, Y, b, MeasurementErrorModel::none(3)), 0.0);
    }
}

TEST(CorrectedLoglik, Examples)
{
    EXPECT_NEAR(corrected_loglik_linear(col({0}), vec({0}), vec({0}), 1.0, MeasurementErrorModel::none(1)),
                -0.5 * std::log(2.0 * std::numbers::pi), 1e-15);
    const Matrix W = oracle::gaussian(6, 2, 61);
    const Vector Y = oracle::gaussian(6, 1, 62);
    const Vector b = vec({0.2, -0.7});
    const double sigma = 1.4;
    double ordinary = 0.0;
    for (Index i = 0; i < 6; ++i) {
        const double r = Y(i) - W.row(i).dot(b);
        ordinary += -0.5 * std::log(2.0 * std::numbers::pi * sigma * sigma) - r * r / (2 * sigma * sigma);
    }
    EXPECT_NEAR(corrected_loglik_linear(W, Y, b, sigma, MeasurementErrorModel::none(2)), ordinary, 1e-12);
    EXPECT_THROW(corrected_loglik_linear(W, Y, b, 0.0, MeasurementErrorModel::none(2)), InvalidArgument);
}

TEST(CorrectedScorePoisson, HandExample)
{
    const Vector s = corrected_score_poisson(col({1}), vec({2}), vec({0.5}), scalar_error(0.2));
    EXPECT_NEAR(s(0), 2.0 - 0.9 * std::exp(0.475), 1e-14);
}

TEST(CorrectedScorePoisson, ReducesToOrdinary)
{
    const Matrix W = oracle::gaussian(10, 3, 71) * 0.5;
    const Vector Y = vec({0, 1, 2, 0, 3, 1, 0, 0, 5, 1});
    const Vector b = vec({0.2, -0.1, 0.3});
    EXPECT_TRUE(corrected_score_poisson(W, Y, b, MeasurementErrorModel::none(3))
                    .isApprox(oracle::poisson_score(W, Y, b), 1e-13));
    const MeasurementErrorModel err{random_delta(3, 72)};
    const Vector at_zero = corrected_score_poisson(W, Y, Vector::Zero(3), err);
    EXPECT_TRUE(at_zero.isApprox(W.transpose() * (Y.array() - 1.0).matrix(), 1e-13));
}

TEST(CorrectedScorePoisson, UnbiasedOverMeasurementError)
{
    const Index n = 15;
    const Index p = 2;
    const Matrix X = oracle::gaussian(n, p, 81) * 0.6;
    Vector Y(n);
    for (Index i = 0; i < n; ++i) Y(i) = static_cast<double>(i % 4);
    const Vector b = vec({0.4, -0.3});
    Matrix delta(2, 2);
    delta << 0.3, 0.05, 0.05, 0.2;
    const MeasurementErrorModel err{delta};
    const Vector target = oracle::poisson_score(X, Y, b);
    const auto mc = oracle::monte_carlo(20000, [&](int i) {
        const Matrix U = sample_mvn(n, delta, 900000 + static_cast<std::uint64_t>(i));
        return Vector(corrected_score_poisson(X + U, Y, b, err));
    });
    for (Index j = 0; j < p; ++j) EXPECT_LE(std::abs(mc.mean(j) - target(j)), 3.0 * mc.se(j)) << j;
}

TEST(CorrectedScorePoisson, DivergenceNamesRow)
{
    Matrix W(3, 1);
    W << 0.0, 800.0, 900.0;
    try {
        corrected_score_poisson(W, vec({0, 1, 2}), vec({1.0}), MeasurementErrorModel::none(1));
        FAIL() << "expected ScoreDivergence";
    } catch (const ScoreDivergence& e) {
        EXPECT_EQ(e.row(), 1);
        EXPECT_DOUBLE_EQ(e.exponent(), 800.0);
    }
}

TEST(CorrectedScorePoisson, RejectsNonCounts)
{
    EXPECT_THROW(corrected_score_poisson(col({1, 2}), vec({1.5, 2}), vec({0}), MeasurementErrorModel::none(1)),
                 InvalidArgument);
    EXPECT_THROW(corrected_score_poisson(col({1, 2}), vec({-1, 2}), vec({0}), MeasurementErrorModel::none(1)),
                 InvalidArgument);
}

TEST(Reliability, Examples)
{
    EXPECT_NEAR(reliability_to_error_variance(0.336), 0.887, 5e-4);
    EXPECT_EQ(reliability_to_error_variance(1.0), 0.0);
    EXPECT_NEAR(reliability_to_error_variance(1.0 / std::sqrt(2.0)), 0.5, 1e-15);
    EXPECT_THROW(reliability_to_error_variance(0.0), InvalidArgument);
    EXPECT_THROW(reliability_to_error_variance(1.01), InvalidArgument);
}

TEST(MeasurementErrorModel, Validation)
{
    Matrix d(2, 2);
    d << 1, 0.2, 0.1, 1;
    EXPECT_THROW(MeasurementErrorModel{d}.validate(), InvalidArgument);
    d << -0.1, 0, 0, 1;
    EXPECT_THROW(MeasurementErrorModel{d}.validate(), InvalidArgument);
    EXPECT_NO_THROW(MeasurementErrorModel::none(3).validate());
}

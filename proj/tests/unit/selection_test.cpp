#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <meboost/selection.hpp>

#include "oracles.hpp"

using namespace meboost;

namespace {

std::vector<std::size_t> sizes(const std::vector<Fold>& folds)
{
    std::vector<std::size_t> out;
    for (const auto& f : folds) out.push_back(f.size());
    return out;
}

struct Data {
    Matrix W;
    Vector Y;
};

Data sparse_regression(Index n, Index p, Index active, double noise, std::uint64_t seed)
{
    Data d;
    d.W = oracle::gaussian(n, p, seed);
    Vector beta = Vector::Zero(p);
    beta.head(active).setOnes();
    d.Y = d.W * beta + noise * oracle::gaussian(n, 1, seed + 1);
    return d;
}

} // namespace

TEST(KFold, Sizes)
{
    const auto eight = kfold_split(80, 8, 1);
    EXPECT_EQ(sizes(eight), std::vector<std::size_t>(8, 10));
    EXPECT_EQ(sizes(kfold_split(7, 3, 1)), (std::vector<std::size_t>{3, 2, 2}));
}

TEST(KFold, PartitionAndDeterminism)
{
    for (std::uint64_t seed : {1u, 2u, 99u}) {
        const auto folds = kfold_split(53, 5, seed);
        std::set<Index> seen;
        for (const auto& f : folds) {
            EXPECT_TRUE(std::is_sorted(f.begin(), f.end()));
            for (Index i : f) EXPECT_TRUE(seen.insert(i).second);
        }
        EXPECT_EQ(seen.size(), 53u);
        EXPECT_EQ(*seen.begin(), 0);
        EXPECT_EQ(*seen.rbegin(), 52);
        EXPECT_EQ(folds, kfold_split(53, 5, seed));
    }
    EXPECT_NE(kfold_split(53, 5, 1), kfold_split(53, 5, 2));
}

TEST(KFold, RangeChecked)
{
    EXPECT_THROW(kfold_split(10, 1, 1), InvalidArgument);
    EXPECT_THROW(kfold_split(10, 11, 1), InvalidArgument);
    EXPECT_NO_THROW(kfold_split(10, 10, 1));
}

TEST(KFold, TrainingIndicesAreComplement)
{
    const auto folds = kfold_split(20, 4, 3);
    for (int k = 0; k < 4; ++k) {
        const auto train = training_indices(20, folds, k);
        EXPECT_EQ(train.size(), 20u - folds[static_cast<std::size_t>(k)].size());
        for (Index i : folds[static_cast<std::size_t>(k)])
            EXPECT_FALSE(std::binary_search(train.begin(), train.end(), i));
    }
}

TEST(PoissonDeviance, Examples)
{
    const Vector y = (Vector(3) << 1, 4, 2).finished();
    EXPECT_NEAR(poisson_deviance(y, y), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(poisson_deviance(Vector::Zero(1), Vector::Constant(1, 2.0)), 4.0);
    EXPECT_NEAR(poisson_deviance(Vector::Constant(1, 3.0), Vector::Ones(1)), 2.0 * (3.0 * std::log(3.0) - 2.0), 1e-14);
    EXPECT_NEAR(2.0 * (3.0 * std::log(3.0) - 2.0), 2.5917, 1e-4);
    EXPECT_THROW(poisson_deviance(Vector::Ones(1), Vector::Zero(1)), InvalidArgument);
    EXPECT_THROW(poisson_deviance(Vector::Ones(2), Vector::Ones(1)), InvalidArgument);
}

TEST(PoissonDeviance, NonnegativeAndZeroOnlyAtSaturation)
{
    std::mt19937_64 eng(5);
    for (int r = 0; r < 50; ++r) {
        Vector y(6), mu(6);
        for (Index i = 0; i < 6; ++i) {
            y(i) = static_cast<double>(std::poisson_distribution<int>(2.0)(eng));
            mu(i) = 0.1 + std::uniform_real_distribution<double>(0.0, 5.0)(eng);
        }
        EXPECT_GT(poisson_deviance(y, mu), 0.0);
        EXPECT_NEAR(poisson_deviance_from_eta(y, mu.array().log().matrix()), poisson_deviance(y, mu), 1e-10);
    }
}

TEST(HoldoutLoss, PerObservation)
{
    const Matrix W = oracle::gaussian(6, 2, 7);
    const Vector Y = oracle::gaussian(6, 1, 8);
    const Vector b = (Vector(2) << 0.3, -0.2).finished();
    EXPECT_NEAR(holdout_loss(W, Y, b, Family::linear), (Y - W * b).squaredNorm() / 6.0, 1e-15);
    const Vector counts = (Vector(6) << 0, 1, 2, 0, 3, 1).finished();
    const Vector mu = (W * b).array().exp();
    EXPECT_NEAR(holdout_loss(W, counts, b, Family::poisson), poisson_deviance(counts, mu) / 6.0, 1e-13);
}

TEST(CvMeboost, SingleTauAndStructure)
{
    const auto d = sparse_regression(60, 6, 2, 1.0, 11);
    const std::vector<double> tau{0.4};
    BoostConfig cfg{0.0, 0.02, 200};
    const auto cv = cv_select_meboost(d.W, d.Y, MeasurementErrorModel::none(6), tau, cfg, CVOptions{5, 3, 1});
    EXPECT_EQ(cv.chosen_tau, 0.4);
    ASSERT_EQ(cv.per_fold.size(), 5u);
    const auto folds = kfold_split(60, 5, 3);
    for (const auto& f : cv.per_fold) {
        EXPECT_EQ(f.test_indices, folds[static_cast<std::size_t>(f.fold)]);
        EXPECT_EQ(f.loss.size(), 201u);
        EXPECT_EQ(f.best_loss, *std::min_element(f.loss.begin(), f.loss.end()));
    }
    ASSERT_TRUE(cv.chosen_l1_norm.has_value());
    double mean_l1 = 0.0;
    for (const auto& f : cv.per_fold) mean_l1 += f.best_tuning / 5.0;
    EXPECT_NEAR(*cv.chosen_l1_norm, mean_l1, 1e-12);
    const auto& steps = cv.refit_path.steps;
    const double gap = std::abs(steps[cv.final_step].l1 - mean_l1);
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const double g = std::abs(steps[i].l1 - mean_l1);
        EXPECT_GE(g, gap);
        if (i < cv.final_step) {
            EXPECT_GT(g, gap);
        }
    }
    EXPECT_EQ(cv.final_beta, steps[cv.final_step].beta);
}

TEST(CvMeboost, HeldOutLossUsesOnlyHeldOutRows)
{
    auto d = sparse_regression(40, 4, 2, 0.5, 13);
    const std::vector<double> tau{0.5};
    BoostConfig cfg{0.0, 0.05, 60};
    const CVOptions opts{4, 9, 1};
    const auto a = cv_select_meboost(d.W, d.Y, MeasurementErrorModel::none(4), tau, cfg, opts);
    const auto folds = kfold_split(40, 4, 9);
    const Fold train = training_indices(40, folds, 0);
    const auto path = meboost_path(d.W(train, Eigen::all), d.Y(train), MeasurementErrorModel::none(4),
                                   BoostConfig{0.5, 0.05, 60});
    const Matrix Wt = d.W(folds[0], Eigen::all);
    const Vector Yt = d.Y(folds[0]);
    for (std::size_t i = 0; i < path.steps.size(); ++i)
        EXPECT_DOUBLE_EQ(a.per_fold[0].loss[i], holdout_loss(Wt, Yt, path.steps[i].beta, Family::linear));
}

TEST(CvMeboost, ChosenTauMinimizesMeanLoss)
{
    const auto d = sparse_regression(50, 8, 3, 1.0, 15);
    const std::vector<double> tau{0.0, 0.5, 1.0};
    const auto cv = cv_select_meboost(d.W, d.Y, MeasurementErrorModel{0.1 * Matrix::Identity(8, 8)}, tau,
                                      BoostConfig{0.0, 0.02, 300}, CVOptions{5, 4, 2});
    ASSERT_EQ(cv.tau_summaries.size(), 3u);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : cv.tau_summaries) best = std::min(best, s.mean_loss);
    ASSERT_TRUE(cv.chosen_tau.has_value());
    EXPECT_NE(std::find(tau.begin(), tau.end(), *cv.chosen_tau), tau.end());
    for (const auto& s : cv.tau_summaries) {
        EXPECT_EQ(s.folds.size(), 5u);
        if (s.tau == *cv.chosen_tau) {
            EXPECT_EQ(s.mean_loss, best);
        }
    }
}

TEST(CvMeboost, DeterministicAcrossJobCounts)
{
    const auto d = sparse_regression(40, 5, 2, 1.0, 17);
    const std::vector<double> tau{0.2, 0.8};
    const BoostConfig cfg{0.0, 0.02, 150};
    const auto a = cv_select_meboost(d.W, d.Y, MeasurementErrorModel::none(5), tau, cfg, CVOptions{4, 5, 1});
    const auto b = cv_select_meboost(d.W, d.Y, MeasurementErrorModel::none(5), tau, cfg, CVOptions{4, 5, 3});
    EXPECT_EQ(a.chosen_tau, b.chosen_tau);
    EXPECT_EQ(a.final_beta, b.final_beta);
    EXPECT_EQ(a.chosen_l1_norm, b.chosen_l1_norm);
}

TEST(CvMeboost, NoiselessDesignRecoversSupport)
{
    const Index n = 200;
    const Index p = 10;
    Eigen::HouseholderQR<Matrix> qr(oracle::gaussian(n, p, 19));
    const Matrix X = std::sqrt(static_cast<double>(n)) * (qr.householderQ() * Matrix::Identity(n, p));
    Vector beta = Vector::Zero(p);
    beta.head(5).setOnes();
    const Vector Y = X * beta;
    const std::vector<double> tau{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    const auto cv = cv_select_meboost(X, Y, MeasurementErrorModel::none(p), tau, BoostConfig{0.0, 0.01, 1000},
                                      CVOptions{5, 1, 1});
    for (Index j = 0; j < p; ++j) EXPECT_EQ(cv.final_beta(j) != 0.0, j < 5) << j;
}

TEST(CvMeboost, FoldErrorsNameTheFold)
{
    const auto d = sparse_regression(20, 3, 1, 1.0, 21);
    Vector Y = d.Y.array().abs().round();
    Y(3) = 0.5;  // not a count; every fold whose training part contains row 3 fails
    try {
        cv_select_meboost(d.W, Y, MeasurementErrorModel::none(3), std::vector<double>{0.5},
                          BoostConfig{0.0, 0.01, 10, Family::poisson}, CVOptions{4, 1, 1});
        FAIL() << "expected an error";
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("fold "), std::string::npos);
    }
    EXPECT_THROW(cv_select_meboost(d.W, d.Y, MeasurementErrorModel::none(3), std::vector<double>{}, BoostConfig{}),
                 InvalidArgument);
    EXPECT_THROW(cv_select_meboost(d.W, d.Y, MeasurementErrorModel::none(3), std::vector<double>{1.5}, BoostConfig{}),
                 InvalidArgument);
}

TEST(CvLasso, SingleLambdaAndInvariants)
{
    const auto d = sparse_regression(50, 6, 2, 1.0, 23);
    const std::vector<double> one{0.1};
    const auto a = cv_select_lasso(d.W, d.Y, MeasurementErrorModel::none(6), one, LassoCVSettings{}, CVOptions{5, 1, 1});
    EXPECT_EQ(a.chosen_lambda, 0.1);
    EXPECT_EQ(a.per_fold.size(), 5u);

    const auto lambdas = lambda_grid(naive_lambda_max(d.W, d.Y), 30, 0.01);
    const auto cv = cv_select_lasso(d.W, d.Y, MeasurementErrorModel::none(6), lambdas, LassoCVSettings{}, CVOptions{5, 1, 1});
    ASSERT_TRUE(cv.chosen_lambda.has_value());
    EXPECT_NE(std::find(lambdas.begin(), lambdas.end(), *cv.chosen_lambda), lambdas.end());
    for (double m : cv.mean_loss) EXPECT_LE(cv.mean_loss[cv.final_step], m);
    const auto full = naive_lasso_path(d.W, d.Y, lambdas);
    EXPECT_LE((cv.final_beta - full[cv.final_step].beta).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CvLasso, NullModelOnPureNoise)
{
    for (std::uint64_t r = 0; r < 20; ++r) {
        const Matrix W = oracle::gaussian(60, 10, 300 + r);
        const Vector Y = oracle::gaussian(60, 1, 400 + r);
        const auto lambdas = lambda_grid(naive_lambda_max(W, Y), 20, 0.01);
        const auto cv = cv_select_lasso(W, Y, MeasurementErrorModel::none(10), lambdas, LassoCVSettings{},
                                        CVOptions{5, r, 1});
        // lambda_max is the null model and sits first on the grid.
        const double gain = cv.mean_loss[0] - cv.mean_loss[cv.final_step];
        EXPECT_GE(gain, 0.0);
        // Standard error of the cross-validated loss at the chosen lambda.
        double ss = 0.0;
        for (const auto& f : cv.per_fold) {
            const double d = f.loss[cv.final_step] - cv.mean_loss[cv.final_step];
            ss += d * d;
        }
        const double se = std::sqrt(ss / 4.0 / 5.0);
        EXPECT_TRUE(cv.final_beta.isZero(0.0) || gain <= se) << "replication " << r << ": gain " << gain
                                                             << ", se " << se;
    }
}

TEST(CvLasso, CocoWithoutErrorMatchesNaive)
{
    const auto d = sparse_regression(60, 5, 2, 1.0, 25);
    const auto lambdas = lambda_grid(naive_lambda_max(d.W, d.Y), 20, 0.01);
    LassoCVSettings coco;
    coco.method = LassoMethod::cocolasso;
    const auto a = cv_select_lasso(d.W, d.Y, MeasurementErrorModel::none(5), lambdas, LassoCVSettings{}, CVOptions{5, 2, 1});
    const auto b = cv_select_lasso(d.W, d.Y, MeasurementErrorModel::none(5), lambdas, coco, CVOptions{5, 2, 1});
    EXPECT_EQ(a.chosen_lambda, b.chosen_lambda);
    EXPECT_LE((a.final_beta - b.final_beta).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(CvLasso, CocoRejectsPoisson)
{
    const auto d = sparse_regression(20, 3, 1, 1.0, 27);
    LassoCVSettings s;
    s.method = LassoMethod::cocolasso;
    s.family = Family::poisson;
    const std::vector<double> l{0.1};
    EXPECT_THROW(fit_lasso_path(d.W, d.Y.array().abs().round(), MeasurementErrorModel::none(3), l, s), InvalidArgument);
}

#include <meboost/selection.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include <meboost/parallel.hpp>
#include <meboost/random.hpp>

namespace meboost {
namespace {

Matrix rows_of(const Matrix& A, const Fold& idx)
{
    return A(idx, Eigen::all);
}

Vector rows_of(const Vector& v, const Fold& idx)
{
    return v(idx);
}

// First index of the minimum.
std::size_t argmin(const std::vector<double>& values)
{
    return static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
}

void check_folds(Index n, int K)
{
    detail::require(K >= 2 && K <= n,
                    fmt::format("number of folds must be in [2, n]; got K={} with n={}", K, n));
}

// Runs `body` for fold k and tags any library error with the fold number.
template <class Body>
void with_fold_context(int k, Body&& body)
{
    try {
        body();
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(fmt::format("fold {}: {}", k + 1, e.what()));
    } catch (const DataError& e) {
        throw DataError(fmt::format("fold {}: {}", k + 1, e.what()));
    } catch (const NumericalError& e) {
        throw NumericalError(fmt::format("fold {}: {}", k + 1, e.what()));
    }
}

} // namespace

std::vector<Fold> kfold_split(Index n, int K, std::uint64_t seed)
{
    check_folds(n, K);
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(derive_seed(seed, {0x6b666f6c64ULL}));
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(order[i], order[j]);
    }
    std::vector<Fold> folds(static_cast<std::size_t>(K));
    for (std::size_t i = 0; i < order.size(); ++i) folds[i % folds.size()].push_back(order[i]);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

Fold training_indices(Index n, const std::vector<Fold>& folds, int k)
{
    detail::require(k >= 0 && k < static_cast<int>(folds.size()), "training_indices: fold out of range");
    std::vector<char> held(static_cast<std::size_t>(n), 0);
    for (Index i : folds[static_cast<std::size_t>(k)]) held[static_cast<std::size_t>(i)] = 1;
    Fold train;
    train.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        if (!held[static_cast<std::size_t>(i)]) train.push_back(i);
    return train;
}

double poisson_deviance(const Vector& Y, const Vector& mu)
{
    detail::require(Y.size() == mu.size(), "poisson_deviance: Y and mu differ in length");
    double total = 0.0;
    for (Index i = 0; i < Y.size(); ++i) {
        detail::require(mu(i) > 0.0, fmt::format("poisson_deviance: mu[{}] = {} is not positive", i, mu(i)));
        const double y = Y(i);
        total += y == 0.0 ? mu(i) : y * std::log(y / mu(i)) - (y - mu(i));
    }
    return 2.0 * total;
}

double poisson_deviance_from_eta(const Vector& Y, const Vector& eta)
{
    detail::require(Y.size() == eta.size(), "poisson_deviance_from_eta: Y and eta differ in length");
    double total = 0.0;
    for (Index i = 0; i < Y.size(); ++i) {
        const double y = Y(i);
        const double mu = std::exp(eta(i));
        total += y == 0.0 ? mu : y * (std::log(y) - eta(i)) - y + mu;
    }
    return 2.0 * total;
}

double holdout_loss(const Matrix& W, const Vector& Y, const Vector& beta, Family family)
{
    const auto n = static_cast<double>(Y.size());
    const Vector eta = W * beta;
    if (family == Family::linear) return (Y - eta).squaredNorm() / n;
    return poisson_deviance_from_eta(Y, eta) / n;
}

CVResult cv_select_meboost(const Matrix& W, const Vector& Y, const MeasurementErrorModel& err,
                           std::span<const double> tau_grid, const BoostConfig& cfg,
                           const CVOptions& opts)
{
    detail::require_rows(W, Y, "cv_select_meboost");
    detail::require(!tau_grid.empty(), "cv_select_meboost: empty tau grid");
    for (double tau : tau_grid)
        detail::require(tau >= 0.0 && tau <= 1.0, fmt::format("cv_select_meboost: tau {} outside [0, 1]", tau));
    err.validate();
    const Index n = W.rows();
    const auto folds = kfold_split(n, opts.K, opts.seed);
    const std::size_t K = folds.size();

    std::vector<TauSummary> summaries(tau_grid.size());
    for (std::size_t t = 0; t < tau_grid.size(); ++t) {
        summaries[t].tau = tau_grid[t];
        summaries[t].folds.resize(K);
    }
    parallel_for(tau_grid.size() * K, opts.jobs, [&](std::size_t cell) {
        const std::size_t t = cell / K;
        const int k = static_cast<int>(cell % K);
        with_fold_context(k, [&] {
            const Fold train = training_indices(n, folds, k);
            const Fold& test = folds[static_cast<std::size_t>(k)];
            BoostConfig c = cfg;
            c.tau = tau_grid[t];
            const auto path = meboost_path(rows_of(W, train), rows_of(Y, train), err, c);
            const Matrix Wt = rows_of(W, test);
            const Vector Yt = rows_of(Y, test);
            FoldCurve curve;
            curve.fold = k;
            curve.test_indices = test;
            for (const auto& s : path.steps) {
                curve.tuning.push_back(s.l1);
                curve.loss.push_back(holdout_loss(Wt, Yt, s.beta, cfg.family));
            }
            const std::size_t best = argmin(curve.loss);
            curve.best_tuning = curve.tuning[best];
            curve.best_loss = curve.loss[best];
            summaries[t].folds[static_cast<std::size_t>(k)] = std::move(curve);
        });
    });

    std::size_t chosen = 0;
    for (std::size_t t = 0; t < summaries.size(); ++t) {
        auto& s = summaries[t];
        for (const auto& f : s.folds) {
            s.mean_l1 += f.best_tuning;
            s.mean_loss += f.best_loss;
        }
        s.mean_l1 /= static_cast<double>(K);
        s.mean_loss /= static_cast<double>(K);
        if (s.mean_loss < summaries[chosen].mean_loss) chosen = t;
    }

    CVResult result;
    result.chosen_tau = summaries[chosen].tau;
    result.chosen_l1_norm = summaries[chosen].mean_l1;
    BoostConfig c = cfg;
    c.tau = *result.chosen_tau;
    result.refit_path = meboost_path(W, Y, err, c);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < result.refit_path.steps.size(); ++i) {
        const double d = std::abs(result.refit_path.steps[i].l1 - *result.chosen_l1_norm);
        if (d < gap) {
            gap = d;
            result.final_step = i;
        }
    }
    result.final_beta = result.refit_path.steps[result.final_step].beta;
    result.per_fold = summaries[chosen].folds;
    result.tau_summaries = std::move(summaries);
    return result;
}

std::string_view to_string(LassoMethod method)
{
    return method == LassoMethod::naive ? "lasso" : "cocolasso";
}

LassoPath fit_lasso_path(const Matrix& W, const Vector& Y, const MeasurementErrorModel& err,
                         std::span<const double> lambdas, const LassoCVSettings& settings)
{
    if (settings.method == LassoMethod::cocolasso) {
        detail::require(settings.family == Family::linear, "the CoCoLasso is defined for the linear family only");
        return cocolasso_path(W, Y, err, lambdas, settings.tol, settings.max_sweeps, settings.projection);
    }
    if (settings.family == Family::poisson)
        return poisson_lasso_path(W, Y, lambdas, settings.penalty_factor, std::max(settings.tol, 1e-6),
                                  settings.max_sweeps);
    const auto n = static_cast<double>(W.rows());
    Matrix gram = W.transpose() * W / n;
    gram = 0.5 * (gram + gram.transpose()).eval();
    return quadratic_lasso_path(gram, W.transpose() * Y / n, lambdas, settings.tol, settings.max_sweeps,
                                settings.penalty_factor);
}

CVResult cv_select_lasso(const Matrix& W, const Vector& Y, const MeasurementErrorModel& err,
                         std::span<const double> lambdas, const LassoCVSettings& settings,
                         const CVOptions& opts)
{
    detail::require_rows(W, Y, "cv_select_lasso");
    detail::require(!lambdas.empty(), "cv_select_lasso: empty lambda grid");
    const Index n = W.rows();
    const auto folds = kfold_split(n, opts.K, opts.seed);
    const std::size_t K = folds.size();

    std::vector<FoldCurve> curves(K);
    parallel_for(K, opts.jobs, [&](std::size_t kk) {
        const int k = static_cast<int>(kk);
        with_fold_context(k, [&] {
            const Fold train = training_indices(n, folds, k);
            const Fold& test = folds[kk];
            const auto path = fit_lasso_path(rows_of(W, train), rows_of(Y, train), err, lambdas, settings);
            const Matrix Wt = rows_of(W, test);
            const Vector Yt = rows_of(Y, test);
            FoldCurve curve;
            curve.fold = k;
            curve.test_indices = test;
            for (const auto& sol : path) {
                curve.tuning.push_back(sol.lambda);
                curve.loss.push_back(holdout_loss(Wt, Yt, sol.beta, settings.family));
            }
            const std::size_t best = argmin(curve.loss);
            curve.best_tuning = curve.tuning[best];
            curve.best_loss = curve.loss[best];
            curves[kk] = std::move(curve);
        });
    });

    CVResult result;
    result.mean_loss.assign(lambdas.size(), 0.0);
    for (const auto& c : curves)
        for (std::size_t l = 0; l < lambdas.size(); ++l) result.mean_loss[l] += c.loss[l] / static_cast<double>(K);
    result.final_step = argmin(result.mean_loss);
    result.chosen_lambda = lambdas[result.final_step];
    const auto full = fit_lasso_path(W, Y, err, lambdas, settings);
    result.refit_path = to_coefficient_path(full, settings.family);
    result.final_beta = full[result.final_step].beta;
    result.chosen_l1_norm = result.final_beta.lpNorm<1>();
    result.per_fold = std::move(curves);
    return result;
}

} // namespace meboost

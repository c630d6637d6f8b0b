#include <meboost/metrics.hpp>

#include <cmath>

namespace meboost {

FitMetrics evaluate_fit(const Vector& beta_hat, const Vector& beta_true, const Matrix& X_test,
                        const Matrix& W_test, const Vector& Y_test)
{
    const Index p = beta_true.size();
    detail::require(beta_hat.size() == p, "evaluate_fit: beta_hat and beta_true differ in length");
    detail::require_rows(X_test, Y_test, "evaluate_fit");
    detail::require_rows(W_test, Y_test, "evaluate_fit");
    detail::require_cols(X_test, p, "X_test", "evaluate_fit");
    detail::require_cols(W_test, p, "W_test", "evaluate_fit");
    detail::require(Y_test.size() > 0, "evaluate_fit: empty test set");

    Index nonzero = 0;
    Index zero = 0;
    Index hits = 0;
    Index rejections = 0;
    for (Index j = 0; j < p; ++j) {
        if (beta_true(j) != 0.0) {
            ++nonzero;
            if (beta_hat(j) != 0.0) ++hits;
        } else {
            ++zero;
            if (beta_hat(j) == 0.0) ++rejections;
        }
    }
    detail::require(nonzero > 0, "evaluate_fit: sensitivity is undefined when beta_true is all zero");

    const auto n = static_cast<double>(Y_test.size());
    FitMetrics m;
    m.mse = (Y_test - X_test * beta_hat).squaredNorm() / n;
    m.mse_m = (Y_test - W_test * beta_hat).squaredNorm() / n;
    m.l1_dist = (beta_hat - beta_true).lpNorm<1>();
    m.sensitivity = static_cast<double>(hits) / static_cast<double>(nonzero);
    m.specificity = zero == 0 ? 1.0 : static_cast<double>(rejections) / static_cast<double>(zero);
    m.l1_norm = beta_hat.lpNorm<1>();
    return m;
}

std::vector<FitMetrics> path_metrics_on_grid(const CoefficientPath& path, const Vector& beta_true,
                                             const Matrix& X_test, const Matrix& W_test,
                                             const Vector& Y_test, std::span<const double> grid)
{
    detail::require(!path.steps.empty(), "path_metrics_on_grid: empty path");
    const std::size_t steps = path.steps.size();
    std::vector<double> mse(steps), mse_m(steps), l1d(steps), sens(steps), spec(steps);
    for (std::size_t s = 0; s < steps; ++s) {
        const auto m = evaluate_fit(path.steps[s].beta, beta_true, X_test, W_test, Y_test);
        mse[s] = m.mse;
        mse_m[s] = m.mse_m;
        l1d[s] = m.l1_dist;
        sens[s] = m.sensitivity;
        spec[s] = m.specificity;
    }
    const auto l1 = path.l1_norms();
    const std::span<const double> l1v(l1);
    const auto i_mse = interpolate_path(l1v, grid, mse);
    const auto i_mse_m = interpolate_path(l1v, grid, mse_m);
    const auto i_l1d = interpolate_path(l1v, grid, l1d);
    const auto i_sens = interpolate_path(l1v, grid, sens);
    const auto i_spec = interpolate_path(l1v, grid, spec);

    std::vector<FitMetrics> out;
    out.reserve(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (!i_mse[g]) continue;
        out.push_back({*i_mse[g], *i_mse_m[g], *i_l1d[g], *i_sens[g], *i_spec[g], grid[g]});
    }
    return out;
}

namespace {

template <class Key>
FitMetrics select_min(std::span<const FitMetrics> metrics, Key key, const char* where)
{
    detail::require(!metrics.empty(), std::string(where) + ": no metrics to select from");
    const FitMetrics* best = &metrics.front();
    for (const auto& m : metrics) {
        const double k = key(m);
        const double kb = key(*best);
        if (k < kb || (k == kb && m.l1_norm < best->l1_norm)) best = &m;
    }
    return *best;
}

} // namespace

FitMetrics select_min_mse_m(std::span<const FitMetrics> metrics)
{
    return select_min(metrics, [](const FitMetrics& m) { return m.mse_m; }, "select_min_mse_m");
}

FitMetrics select_min_mse(std::span<const FitMetrics> metrics)
{
    return select_min(metrics, [](const FitMetrics& m) { return m.mse; }, "select_min_mse");
}

MetricsSummary aggregate_replications(std::span<const FitMetrics> replications)
{
    detail::require(!replications.empty(), "aggregate_replications: no replications");
    constexpr int kFields = 6;
    auto fields = [](const FitMetrics& m) {
        return std::array<double, kFields>{m.mse, m.mse_m, m.l1_dist, m.sensitivity, m.specificity,
                                           m.l1_norm};
    };
    auto assemble = [](const std::array<double, kFields>& a) {
        return FitMetrics{a[0], a[1], a[2], a[3], a[4], a[5]};
    };

    const auto m = static_cast<double>(replications.size());
    std::array<double, kFields> mean{};
    for (const auto& r : replications) {
        const auto f = fields(r);
        for (int k = 0; k < kFields; ++k) mean[k] += f[k];
    }
    for (auto& v : mean) v /= m;

    MetricsSummary out;
    out.mean = assemble(mean);
    out.count = replications.size();
    if (replications.size() > 1) {
        std::array<double, kFields> ss{};
        for (const auto& r : replications) {
            const auto f = fields(r);
            for (int k = 0; k < kFields; ++k) ss[k] += (f[k] - mean[k]) * (f[k] - mean[k]);
        }
        for (auto& v : ss) v = std::sqrt(v / (m - 1.0) / m);
        out.se = assemble(ss);
    }
    return out;
}

} // namespace meboost

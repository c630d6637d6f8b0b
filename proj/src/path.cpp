#include <meboost/path.hpp>

#include <cmath>

#include <fmt/format.h>

namespace meboost {
namespace {

constexpr double kScoreNoise = 1e-10;

} // namespace

void BoostConfig::validate() const
{
    detail::require(tau >= 0.0 && tau <= 1.0, "tau must lie in [0, 1]");
    detail::require(gamma > 0.0 && std::isfinite(gamma), "gamma must be positive");
    detail::require(iterations >= 0, "iteration count must be nonnegative");
}

bool CoefficientPath::any_variance_floored() const
{
    for (const auto& s : steps)
        if (s.variance_floored) return true;
    return false;
}

std::vector<double> CoefficientPath::l1_norms() const
{
    std::vector<double> l1;
    l1.reserve(steps.size());
    for (const auto& s : steps) l1.push_back(s.l1);
    return l1;
}

std::vector<Index> threshold_set(const Vector& nu, double tau)
{
    detail::require(nu.size() > 0, "threshold_set: empty score vector");
    const double peak = nu.cwiseAbs().maxCoeff();
    if (peak == 0.0) throw StationaryPoint();
    if (!std::isfinite(peak)) throw NumericalError("threshold_set: score vector is not finite");
    const double cut = tau * peak;
    std::vector<Index> J;
    for (Index j = 0; j < nu.size(); ++j)
        if (std::abs(nu(j)) >= cut) J.push_back(j);
    return J;
}

CoefficientPath meboost_path(const Matrix& W, const Vector& Y, const MeasurementErrorModel& err,
                             const BoostConfig& cfg)
{
    cfg.validate();
    detail::require_rows(W, Y, "meboost_path");
    err.validate();
    detail::require_square(err.delta, W.cols(), "delta", "meboost_path");
    if (cfg.family == Family::poisson) detail::check_counts(Y, "meboost_path");

    const Index p = W.cols();
    const bool linear = cfg.family == Family::linear;

    CoefficientPath path;
    path.family = cfg.family;
    path.config = cfg;
    path.steps.reserve(static_cast<std::size_t>(cfg.iterations) + 1);

    // Coefficients are integer multiples of gamma; the counts are the exact state.
    Eigen::Matrix<long long, Eigen::Dynamic, 1> counts = Eigen::Matrix<long long, Eigen::Dynamic, 1>::Zero(p);
    Vector beta = Vector::Zero(p);
    double sigma2 = 1.0;
    path.steps.push_back(PathStep{0, beta, 0.0, linear ? std::optional<double>(sigma2) : std::nullopt,
                                  std::nullopt, false});

    for (int t = 1; t <= cfg.iterations; ++t) {
        Vector nu;
        try {
            nu = linear ? corrected_score_linear(W, Y, beta, sigma2, err)
                        : corrected_score_poisson(W, Y, beta, err);
        } catch (const ScoreDivergence& e) {
            path.termination = Termination::score_divergence;
            path.termination_detail = fmt::format("iteration {}: {}", t, e.what());
            break;
        }

        std::vector<Index> J;
        try {
            J = threshold_set(nu, cfg.tau);
        } catch (const StationaryPoint&) {
            path.termination = Termination::stationary_point;
            path.termination_detail = fmt::format("iteration {}: score is identically zero", t);
            break;
        }

        // Scores at rounding level relative to the peak carry no sign.
        const double noise = kScoreNoise * nu.cwiseAbs().maxCoeff();
        for (Index j : J) {
            if (nu(j) > noise) ++counts(j);
            else if (nu(j) < -noise) --counts(j);
            beta(j) = static_cast<double>(counts(j)) * cfg.gamma;
        }

        PathStep step;
        step.t = t;
        step.beta = beta;
        step.l1 = beta.lpNorm<1>();
        if (linear) {
            const double raw = corrected_variance_raw(W, Y, beta, err);
            step.variance_floored = raw < kVarianceFloor;
            sigma2 = std::max(raw, kVarianceFloor);
            step.sigma2 = sigma2;
        }
        path.steps.push_back(std::move(step));
    }
    return path;
}

std::vector<std::optional<double>> interpolate_path(std::span<const double> l1,
                                                    std::span<const double> grid,
                                                    std::span<const double> statistic)
{
    if (l1.empty()) throw InvalidArgument("interpolate_path: empty path");
    if (statistic.size() != l1.size())
        throw InvalidArgument(fmt::format("interpolate_path: {} statistic values for {} path steps",
                                          statistic.size(), l1.size()));
    for (std::size_t g = 1; g < grid.size(); ++g)
        detail::require(grid[g] > grid[g - 1], "interpolate_path: grid must be increasing");

    std::vector<std::optional<double>> out;
    out.reserve(grid.size());
    for (double g : grid) {
        std::optional<double> value;
        if (l1.size() == 1 && g == l1[0]) value = statistic[0];
        for (std::size_t i = 0; i + 1 < l1.size() && !value; ++i) {
            const double a = l1[i];
            const double b = l1[i + 1];
            if (g < std::min(a, b) || g > std::max(a, b)) continue;
            if (a == b) {
                value = statistic[i + 1];
            } else {
                const double w = (g - a) / (b - a);
                value = (1.0 - w) * statistic[i] + w * statistic[i + 1];
            }
        }
        if (!value && g > l1.back()) value = statistic.back();
        out.push_back(value);
    }
    return out;
}

std::vector<std::optional<double>> interpolate_path(const CoefficientPath& path,
                                                    std::span<const double> grid,
                                                    std::span<const double> statistic)
{
    const auto l1 = path.l1_norms();
    return interpolate_path(std::span<const double>(l1), grid, statistic);
}

std::vector<double> default_l1_grid()
{
    std::vector<double> grid;
    grid.reserve(300);
    for (int k = 1; k <= 300; ++k) grid.push_back(static_cast<double>(k) / 20.0);
    return grid;
}

} // namespace meboost

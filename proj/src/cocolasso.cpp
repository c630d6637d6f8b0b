#include <meboost/cocolasso.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "eigen_lapack.hpp"

namespace meboost {
namespace {

struct ConeProjection {
    Matrix matrix;
    Matrix correction;  ///< matrix - input, PSD
};

ConeProjection project_cone(const Matrix& Z, double eps)
{
    const auto spec = detail::eigenpairs_at_most(Z, eps);
    ConeProjection out{Z, Matrix::Zero(Z.rows(), Z.cols())};
    if (spec.values.size() > 0) {
        const Vector c = (eps - spec.values.array()).cwiseMax(0.0);
        out.correction.noalias() = spec.vectors * c.asDiagonal() * spec.vectors.transpose();
        out.correction = 0.5 * (out.correction + out.correction.transpose()).eval();
        out.matrix += out.correction;
    }
    return out;
}

// Lower bound on the optimal radius from PSD G: any feasible M satisfies
// eps tr(G) <= <G, M> <= <G, Sigma_hat> + r |G|_1.
double certified_radius(const Matrix& G, double eps, const Matrix& sigma_hat)
{
    const double l1 = G.cwiseAbs().sum();
    if (!(l1 > 0.0)) return 0.0;
    return (eps * G.trace() - G.cwiseProduct(sigma_hat).sum()) / l1;
}

Matrix project_box(const Matrix& Z, const Matrix& center, double radius)
{
    return Z.array().max(center.array() - radius).min(center.array() + radius).matrix();
}

double max_distance(const Matrix& A, const Matrix& B)
{
    return (A - B).cwiseAbs().maxCoeff();
}

// Euclidean projection of the entries of V onto the L1 ball of the given radius (Michelot).
Matrix project_l1_ball(const Matrix& V, double radius)
{
    const double total = V.cwiseAbs().sum();
    if (total <= radius) return V;
    std::vector<double> active(V.data(), V.data() + V.size());
    for (double& a : active) a = std::abs(a);
    double theta = (total - radius) / static_cast<double>(active.size());
    for (;;) {
        std::size_t kept = 0;
        double sum = 0.0;
        for (double a : active)
            if (a > theta) {
                active[kept++] = a;
                sum += a;
            }
        const bool stable = kept == active.size();
        active.resize(kept);
        theta = (sum - radius) / static_cast<double>(kept);
        if (stable) break;
    }
    return V.unaryExpr([theta](double v) {
        const double m = std::abs(v) - theta;
        return m > 0.0 ? std::copysign(m, v) : 0.0;
    });
}

// Type-II Anderson extrapolation over the last `memory` iterates of a fixed-point map.
class Anderson {
public:
    explicit Anderson(int memory) : memory_(memory) {}

    void reset()
    {
        count_ = 0;
        head_ = 0;
        has_prev_ = false;
    }

    /// x: current point, f: map at x. Returns the extrapolated next point.
    Vector next(const Vector& x, const Vector& f)
    {
        const Index n = x.size();
        if (dx_.rows() != n) {
            dx_.resize(n, memory_);
            dg_.resize(n, memory_);
            reset();
        }
        const Vector g = f - x;
        if (has_prev_) {
            dx_.col(head_) = x - x_prev_;
            dg_.col(head_) = g - g_prev_;
            head_ = (head_ + 1) % memory_;
            count_ = std::min(count_ + 1, memory_);
        }
        x_prev_ = x;
        g_prev_ = g;
        has_prev_ = true;
        if (count_ == 0) return f;

        const auto G = dg_.leftCols(count_);
        const auto X = dx_.leftCols(count_);
        Matrix gram = G.transpose() * G;
        gram.diagonal().array() += 1e-12 * std::max(gram.trace(), 1e-300);
        const Vector gamma = gram.ldlt().solve(G.transpose() * g);
        return f - X * gamma - G * gamma;
    }

private:
    int memory_;
    int count_ = 0;
    int head_ = 0;
    Matrix dx_, dg_;
    Vector x_prev_, g_prev_;
    bool has_prev_ = false;
};

constexpr double kInitialPenalty = 150.0;  // scaled by 1/p^2
constexpr int kAndersonMemory = 10;
constexpr int kBalanceEvery = 25;
constexpr double kBalanceRatio = 3.0;
constexpr double kSafeguardGrowth = 10.0;

} // namespace

ProjectionResult nearest_pd_projection(const Matrix& sigma_hat, const ProjectionOptions& opts)
{
    detail::require(sigma_hat.rows() == sigma_hat.cols() && sigma_hat.rows() > 0,
                    "nearest_pd_projection: matrix must be square and nonempty");
    detail::require((sigma_hat - sigma_hat.transpose()).cwiseAbs().maxCoeff() <= 1e-10,
                    "nearest_pd_projection: matrix must be symmetric");
    detail::require(opts.eps_pd > 0.0 && opts.tol > 0.0 && opts.max_iter > 0,
                    "nearest_pd_projection: invalid options");
    const double eps = opts.eps_pd;
    const Index p = sigma_hat.rows();
    const Matrix S = 0.5 * (sigma_hat + sigma_hat.transpose());

    ProjectionResult result;
    auto& diag = result.diagnostics;
    diag.input_min_eigenvalue = detail::min_eigenvalue(S);
    if (diag.input_min_eigenvalue >= eps - 1e-10) {
        diag.fast_path = true;
        diag.min_eigenvalue = diag.input_min_eigenvalue;
        result.matrix = sigma_hat;
        return result;
    }

    // The diagonal shift is always feasible.
    Matrix best = S;
    best.diagonal().array() += eps - diag.input_min_eigenvalue;
    double upper = eps - diag.input_min_eigenvalue;
    double lower = 0.0;

    // Splitting of min |R|_max + I_cone(M) s.t. M - R = S in Douglas-Rachford form: the state
    // V carries the scaled dual U = P_ball(V) and the residual R = V - U.
    double rho = kInitialPenalty / static_cast<double>(p * p);
    Matrix V = Matrix::Zero(p, p);
    Matrix plain_next;  // plain map value at the last accepted point
    Matrix prev_R;
    Anderson anderson(kAndersonMemory);
    double best_residual = std::numeric_limits<double>::infinity();
    bool plain_step = false;  // the next map evaluation is taken as is, with no extrapolation
    bool converged = false;

    for (int it = 1; it <= opts.max_iter; ++it) {
        diag.iterations = it;
        Matrix U = project_l1_ball(V, 1.0 / rho);
        Matrix R = V - U;
        const Matrix Z = S + R - U;
        if (!Z.allFinite()) {
            // An extrapolated point left the representable range: restart from the plain step.
            ++diag.safeguard_resets;
            anderson.reset();
            V = plain_next.size() > 0 ? plain_next : Matrix::Zero(p, p);
            plain_step = true;
            continue;
        }
        auto cone = project_cone(Z, eps);
        if (const double d = max_distance(cone.matrix, S); d < upper) {
            upper = d;
            best = cone.matrix;
        }
        lower = std::max(lower, certified_radius(cone.correction, eps, S));
        if (upper - lower <= opts.tol) {
            converged = true;
            break;
        }

        Matrix F = cone.matrix - S + U;
        const double residual = (F - V).norm();
        if (!plain_step && residual > kSafeguardGrowth * best_residual && plain_next.size() > 0) {
            ++diag.safeguard_resets;
            anderson.reset();
            V = plain_next;
            plain_step = true;
            continue;
        }
        best_residual = std::min(best_residual, residual);

        if (it % kBalanceEvery == 0 && prev_R.size() > 0) {
            const double primal = (cone.matrix - S - R).norm() /
                                  std::max({cone.matrix.norm(), (S + R).norm(), 1e-300});
            const double dual = (R - prev_R).norm() / std::max(U.norm(), 1e-300);
            double factor = 1.0;
            if (primal > kBalanceRatio * dual) factor = 2.0;
            else if (dual > kBalanceRatio * primal) factor = 0.5;
            if (factor != 1.0) {
                rho *= factor;
                ++diag.penalty_updates;
                V = R + U / factor;
                anderson.reset();
                best_residual = std::numeric_limits<double>::infinity();
                plain_next.resize(0, 0);
                prev_R = std::move(R);
                continue;
            }
        }
        prev_R = std::move(R);
        plain_next = F;

        if (plain_step) {
            plain_step = false;
            V = std::move(F);
            continue;
        }
        const Eigen::Map<const Vector> x(V.data(), V.size());
        const Eigen::Map<const Vector> f(F.data(), F.size());
        const Vector next = anderson.next(x, f);
        if (next.allFinite()) {
            if (!next.isApprox(f)) ++diag.accelerated_steps;
            V = Eigen::Map<const Matrix>(next.data(), p, p);
        } else {
            anderson.reset();
            V = std::move(F);
        }
    }

    diag.distance = upper;
    diag.lower_bound = lower;
    diag.penalty = rho * static_cast<double>(p * p);
    if (!converged)
        throw ProjectionFailure(
            fmt::format("nearest_pd_projection: gap {:.3g} above tol {:.3g} after {} iterations "
                        "(bounds [{:.6g}, {:.6g}])",
                        upper - lower, opts.tol, opts.max_iter, lower, upper),
            diag);
    best = 0.5 * (best + best.transpose()).eval();
    diag.min_eigenvalue = detail::min_eigenvalue(best);
    result.matrix = std::move(best);
    return result;
}

FeasibilityProbe probe_feasibility(const Matrix& sigma_hat, double radius, double eps_pd,
                                   double slack, int max_iter)
{
    detail::require(sigma_hat.rows() == sigma_hat.cols() && sigma_hat.rows() > 0,
                    "probe_feasibility: matrix must be square and nonempty");
    detail::require(radius >= 0.0 && eps_pd > 0.0 && slack > 0.0 && max_iter > 0,
                    "probe_feasibility: invalid arguments");
    const Index p = sigma_hat.rows();
    const Matrix S = 0.5 * (sigma_hat + sigma_hat.transpose());

    FeasibilityProbe probe;
    probe.upper = std::numeric_limits<double>::infinity();
    Matrix x = S;
    Matrix box_increment = Matrix::Zero(p, p);
    Matrix cone_increment = Matrix::Zero(p, p);
    for (int it = 1; it <= max_iter; ++it) {
        probe.iterations = it;
        const Matrix y = project_box(x + box_increment, S, radius);
        box_increment += x - y;
        const Matrix z = y + cone_increment;
        auto cone = project_cone(z, eps_pd);
        cone_increment = z - cone.matrix;
        x = std::move(cone.matrix);

        if (const double d = max_distance(x, S); d < probe.upper) {
            probe.upper = d;
            probe.witness = x;
        }
        // The cone correction of the box iterate tends to the separating direction when the
        // sets do not meet.
        probe.lower = std::max(probe.lower, certified_radius(cone.correction, eps_pd, S));
        if (probe.upper <= radius + slack) {
            probe.outcome = Feasibility::feasible;
            break;
        }
        if (probe.lower > radius) {
            probe.outcome = Feasibility::infeasible;
            break;
        }
    }
    return probe;
}

CorrectedMoments corrected_moments(const Matrix& W, const Vector& Y, const MeasurementErrorModel& err)
{
    detail::require_rows(W, Y, "corrected_moments");
    detail::require_square(err.delta, W.cols(), "delta", "corrected_moments");
    detail::require(W.rows() > 0, "corrected_moments: no observations");
    const auto n = static_cast<double>(W.rows());
    CorrectedMoments m;
    m.rho_tilde = W.transpose() * Y / n;
    Matrix gram = W.transpose() * W / n;
    m.sigma_hat = 0.5 * (gram + gram.transpose()) - err.delta;
    return m;
}

CocoLassoFit cocolasso_fit(const Matrix& W, const Vector& Y, const MeasurementErrorModel& err,
                           std::span<const double> lambdas, double tol, int max_sweeps,
                           const ProjectionOptions& opts)
{
    err.validate();
    CocoLassoFit fit{corrected_moments(W, Y, err), {}};
    auto projection = nearest_pd_projection(fit.moments.sigma_hat, opts);
    fit.moments.projected = std::move(projection.matrix);
    fit.moments.diagnostics = std::move(projection.diagnostics);
    fit.path = quadratic_lasso_path(*fit.moments.projected, fit.moments.rho_tilde, lambdas, tol,
                                    max_sweeps);
    return fit;
}

LassoPath cocolasso_path(const Matrix& W, const Vector& Y, const MeasurementErrorModel& err,
                         std::span<const double> lambdas, double tol, int max_sweeps,
                         const ProjectionOptions& opts)
{
    return cocolasso_fit(W, Y, err, lambdas, tol, max_sweeps, opts).path;
}

} // namespace meboost

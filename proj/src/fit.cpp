#include <meboost/fit.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include <meboost/parallel.hpp>
#include <meboost/quad_lasso.hpp>
#include <meboost/random.hpp>
#include <meboost/selection.hpp>

namespace meboost {
namespace {

constexpr std::uint64_t kSplitStream = 0x73706c6974;
constexpr std::uint64_t kCvStream = 0x6376;

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, std::string_view what)
{
    if (!j.is_object()) throw InvalidArgument(fmt::format("{} config must be a JSON object", what));
    std::string unknown;
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
    if (!unknown.empty()) throw InvalidArgument(fmt::format("unknown {} config field(s): {}", what, unknown));
}

ErrorSpec error_spec_from(const nlohmann::json& j)
{
    if (j.is_string()) return read_error_spec(j.get<std::string>());
    return j.get<ErrorSpec>();
}

void check_spec_names(const ErrorSpec& spec, const std::vector<std::string>& names)
{
    auto check = [&](const std::string& name) {
        if (std::find(names.begin(), names.end(), name) == names.end())
            throw DataError(fmt::format("error spec refers to column '{}', which is not a predictor", name));
    };
    for (const auto& c : spec.columns) check(c.name);
    for (const auto& b : spec.blocks)
        for (const auto& name : b.columns) check(name);
}

Matrix take_rows(const Matrix& A, const std::vector<Index>& idx)
{
    return A(idx, Eigen::all);
}

Vector take_rows(const Vector& v, const std::vector<Index>& idx)
{
    return v(idx);
}

} // namespace

Matrix PreparedData::delta(const ErrorSpec& spec, double scale) const
{
    const Matrix d = spec.assemble(predictors, scale);
    if (!intercept) return d;
    const auto p = static_cast<Index>(columns.size());
    Matrix full = Matrix::Zero(p, p);
    full.topLeftCorner(d.rows(), d.cols()) = d;
    return full;
}

PreparedData prepare_data(const NumericData& data, const std::string& outcome, Family family,
                          const std::vector<std::string>& predictors)
{
    const std::size_t y_col = column_index(data.names, outcome);
    PreparedData out;
    out.family = family;
    if (predictors.empty()) {
        for (std::size_t c = 0; c < data.names.size(); ++c)
            if (c != y_col) out.predictors.push_back(data.names[c]);
    } else {
        out.predictors = predictors;
    }
    if (out.predictors.empty()) throw DataError("no predictor columns");
    std::set<std::string> seen;
    for (const auto& name : out.predictors) {
        if (name == outcome) throw DataError(fmt::format("outcome '{}' is also listed as a predictor", name));
        if (!seen.insert(name).second) throw DataError(fmt::format("column '{}' appears twice", name));
    }

    const Index n = data.values.rows();
    if (n < 2) throw DataError("need at least two data rows");
    Matrix X(n, static_cast<Index>(out.predictors.size()));
    for (std::size_t j = 0; j < out.predictors.size(); ++j) {
        X.col(static_cast<Index>(j)) = data.values.col(static_cast<Index>(column_index(data.names, out.predictors[j])));
        const auto col = X.col(static_cast<Index>(j));
        if (col.maxCoeff() == col.minCoeff())
            throw DataError(fmt::format("column '{}' is constant and cannot be standardized", out.predictors[j]));
    }
    out.Y = data.values.col(static_cast<Index>(y_col));
    if (family == Family::poisson) {
        for (Index i = 0; i < n; ++i)
            if (!(out.Y(i) >= 0.0) || std::floor(out.Y(i)) != out.Y(i))
                throw DataError(fmt::format("row {}, column '{}': {} is not a nonnegative integer count", i + 1,
                                            outcome, out.Y(i)));
    }
    out.standardization = Standardization::fit(X);
    const Matrix Z = out.standardization.apply(X);
    out.columns = out.predictors;
    if (family == Family::poisson) {
        out.intercept = true;
        out.columns.emplace_back(kInterceptName);
        out.W.resize(n, Z.cols() + 1);
        out.W << Z, Vector::Ones(n);
    } else {
        out.W = Z;
    }
    return out;
}

Split train_test_split(Index n, double test_fraction, std::uint64_t seed)
{
    detail::require(test_fraction >= 0.0 && test_fraction < 1.0, "test_fraction must lie in [0, 1)");
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(derive_seed(seed, {kSplitStream}));
    for (std::size_t i = order.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(order[i - 1], order[j]);
    }
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    Split s;
    s.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(s.test.begin(), s.test.end());
    std::sort(s.train.begin(), s.train.end());
    return s;
}

void FitConfig::validate() const
{
    std::vector<std::string> problems;
    if (outcome.empty()) problems.emplace_back("outcome is not set");
    if (tau_grid.empty()) problems.emplace_back("tau_grid is empty");
    for (double t : tau_grid)
        if (!(t >= 0.0 && t <= 1.0)) problems.push_back(fmt::format("tau {} outside [0, 1]", t));
    if (delta_scale_grid.empty()) problems.emplace_back("delta_scale_grid is empty");
    for (double s : delta_scale_grid)
        if (!(s >= 0.0)) problems.push_back(fmt::format("delta scale {} is negative", s));
    if (!(gamma > 0.0)) problems.push_back(fmt::format("gamma must be positive (got {})", gamma));
    if (iterations < 0) problems.push_back(fmt::format("iterations must be >= 0 (got {})", iterations));
    if (K < 2) problems.push_back(fmt::format("K must be >= 2 (got {})", K));
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        problems.push_back(fmt::format("test_fraction must lie in [0, 1) (got {})", test_fraction));
    if (lambda_count < 1) problems.push_back(fmt::format("lambda_count must be >= 1 (got {})", lambda_count));
    if (!(lambda_ratio > 0.0 && lambda_ratio < 1.0))
        problems.push_back(fmt::format("lambda_ratio must lie in (0, 1) (got {})", lambda_ratio));
    if (jobs < 1) problems.push_back(fmt::format("jobs must be >= 1 (got {})", jobs));
    if (problems.empty()) return;
    std::string message = "invalid fit config:";
    for (const auto& p : problems) message += "\n  - " + p;
    throw InvalidArgument(message);
}

void from_json(const nlohmann::json& j, FitConfig& cfg)
{
    reject_unknown(j,
                   {"data", "outcome", "family", "error_spec", "predictors", "tau_grid", "delta_scale_grid",
                    "gamma", "iterations", "K", "seed", "test_fraction", "lambda_count", "lambda_ratio",
                    "naive_lasso", "jobs", "output"},
                   "fit");
    cfg = FitConfig{};
    try {
        if (j.contains("data")) cfg.data = j.at("data").get<std::string>();
        cfg.outcome = j.value("outcome", cfg.outcome);
        if (j.contains("family")) cfg.family = parse_family(j.at("family").get<std::string>());
        if (j.contains("error_spec")) cfg.error_spec = error_spec_from(j.at("error_spec"));
        if (j.contains("predictors")) cfg.predictors = j.at("predictors").get<std::vector<std::string>>();
        if (j.contains("tau_grid")) cfg.tau_grid = j.at("tau_grid").get<std::vector<double>>();
        if (j.contains("delta_scale_grid"))
            cfg.delta_scale_grid = j.at("delta_scale_grid").get<std::vector<double>>();
        cfg.gamma = j.value("gamma", cfg.gamma);
        cfg.iterations = j.value("iterations", cfg.iterations);
        cfg.K = j.value("K", cfg.K);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.test_fraction = j.value("test_fraction", cfg.test_fraction);
        cfg.lambda_count = j.value("lambda_count", cfg.lambda_count);
        cfg.lambda_ratio = j.value("lambda_ratio", cfg.lambda_ratio);
        cfg.naive_lasso = j.value("naive_lasso", cfg.naive_lasso);
        cfg.jobs = j.value("jobs", cfg.jobs);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(fmt::format("fit config: {}", e.what()));
    }
}

void to_json(nlohmann::json& j, const FitConfig& cfg)
{
    j = nlohmann::json{
        {"data", cfg.data.string()},
        {"outcome", cfg.outcome},
        {"family", to_string(cfg.family)},
        {"error_spec", cfg.error_spec},
        {"predictors", cfg.predictors},
        {"tau_grid", cfg.tau_grid},
        {"delta_scale_grid", cfg.delta_scale_grid},
        {"gamma", cfg.gamma},
        {"iterations", cfg.iterations},
        {"K", cfg.K},
        {"seed", cfg.seed},
        {"test_fraction", cfg.test_fraction},
        {"lambda_count", cfg.lambda_count},
        {"lambda_ratio", cfg.lambda_ratio},
        {"naive_lasso", cfg.naive_lasso},
        {"jobs", cfg.jobs},
    };
}

FitReport run_fit(const NumericData& data, const FitConfig& cfg)
{
    cfg.validate();
    const auto prep = prepare_data(data, cfg.outcome, cfg.family, cfg.predictors);
    check_spec_names(cfg.error_spec, prep.predictors);
    // Scaled variances must stay below 1; checked for every scale before any fitting starts.
    std::vector<Matrix> deltas;
    for (double scale : cfg.delta_scale_grid) deltas.push_back(prep.delta(cfg.error_spec, scale));

    const auto split = train_test_split(prep.W.rows(), cfg.test_fraction, cfg.seed);
    if (static_cast<Index>(split.train.size()) < cfg.K)
        throw DataError(fmt::format("{} training rows cannot be split into {} folds", split.train.size(), cfg.K));
    const Matrix W_train = take_rows(prep.W, split.train);
    const Matrix W_test = take_rows(prep.W, split.test);
    Vector Y_train = take_rows(prep.Y, split.train);
    Vector Y_test = take_rows(prep.Y, split.test);
    double y_offset = 0.0;
    if (cfg.family == Family::linear) {
        y_offset = Y_train.mean();
        Y_train.array() -= y_offset;
        Y_test.array() -= y_offset;
    }

    FitReport report;
    report.family = cfg.family;
    report.outcome = cfg.outcome;
    report.predictors = prep.predictors;
    report.coefficient_names = prep.columns;
    report.n_train = static_cast<Index>(split.train.size());
    report.n_test = static_cast<Index>(split.test.size());
    report.seed = cfg.seed;
    report.config = cfg;

    const std::size_t n_boost = cfg.delta_scale_grid.size() * cfg.tau_grid.size();
    const std::size_t n_cells = n_boost + (cfg.naive_lasso ? 1 : 0);
    report.fits.resize(n_cells);
    const CVOptions cv{cfg.K, derive_seed(cfg.seed, {kCvStream}), 1};
    const auto p = static_cast<Index>(prep.columns.size());

    auto finish = [&](FitColumn& col) {
        const Index k = static_cast<Index>(prep.predictors.size());
        const double offset = prep.intercept ? col.beta(p - 1) : y_offset;
        col.raw = destandardize(col.beta.head(k), prep.standardization, offset);
        if (split.test.empty()) return;
        const Vector eta = W_test * col.beta;
        const auto m = static_cast<double>(Y_test.size());
        if (cfg.family == Family::poisson) {
            col.deviance = poisson_deviance_from_eta(Y_test, eta);
            col.mse_m = (Y_test.array() - eta.array().exp()).square().sum() / m;
        } else {
            col.deviance = (Y_test - eta).squaredNorm();
            col.mse_m = *col.deviance / m;
        }
    };

    parallel_for(n_cells, cfg.jobs, [&](std::size_t cell) {
        FitColumn col;
        if (cell < n_boost) {
            const std::size_t s = cell / cfg.tau_grid.size();
            const std::size_t t = cell % cfg.tau_grid.size();
            BoostConfig bc;
            bc.gamma = cfg.gamma;
            bc.iterations = cfg.iterations;
            bc.family = cfg.family;
            const double tau = cfg.tau_grid[t];
            const auto res = cv_select_meboost(W_train, Y_train, MeasurementErrorModel{deltas[s]},
                                               std::span<const double>(&tau, 1), bc, cv);
            col.method = "MEBoost";
            col.delta_scale = cfg.delta_scale_grid[s];
            col.tau = tau;
            col.l1_norm = res.refit_path.steps[res.final_step].l1;
            col.cv_loss = res.tau_summaries.front().mean_loss;
            col.beta = res.final_beta;
            col.variance_floored = res.refit_path.steps[res.final_step].variance_floored;
        } else {
            LassoCVSettings settings;
            settings.family = cfg.family;
            settings.penalty_factor = Vector::Ones(p);
            if (prep.intercept) settings.penalty_factor(p - 1) = 0.0;
            const double lmax = cfg.family == Family::poisson
                                    ? poisson_lambda_max(W_train, Y_train, settings.penalty_factor)
                                    : naive_lambda_max(W_train, Y_train);
            const auto lambdas = lambda_grid(lmax, cfg.lambda_count, cfg.lambda_ratio);
            const auto res = cv_select_lasso(W_train, Y_train, MeasurementErrorModel::none(p), lambdas, settings, cv);
            col.method = "Lasso";
            col.lambda = res.chosen_lambda;
            col.l1_norm = res.final_beta.lpNorm<1>();
            col.cv_loss = res.mean_loss[res.final_step];
            col.beta = res.final_beta;
        }
        finish(col);
        report.fits[cell] = std::move(col);
    });
    return report;
}

FitReport run_fit(const FitConfig& cfg)
{
    return run_fit(to_numeric(read_csv(cfg.data)), cfg);
}

void from_json(const nlohmann::json& j, PathConfig& cfg)
{
    reject_unknown(j,
                   {"data", "outcome", "family", "error_spec", "predictors", "delta_scale", "tau", "gamma",
                    "iterations", "output", "seed", "jobs"},
                   "path");
    cfg = PathConfig{};
    try {
        if (j.contains("data")) cfg.data = j.at("data").get<std::string>();
        cfg.outcome = j.value("outcome", cfg.outcome);
        if (j.contains("family")) cfg.family = parse_family(j.at("family").get<std::string>());
        if (j.contains("error_spec")) cfg.error_spec = error_spec_from(j.at("error_spec"));
        if (j.contains("predictors")) cfg.predictors = j.at("predictors").get<std::vector<std::string>>();
        cfg.delta_scale = j.value("delta_scale", cfg.delta_scale);
        cfg.tau = j.value("tau", cfg.tau);
        cfg.gamma = j.value("gamma", cfg.gamma);
        cfg.iterations = j.value("iterations", cfg.iterations);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(fmt::format("path config: {}", e.what()));
    }
}

CoefficientPath run_path(const NumericData& data, const PathConfig& cfg, std::vector<std::string>* columns)
{
    detail::require(!cfg.outcome.empty(), "outcome is not set");
    const auto prep = prepare_data(data, cfg.outcome, cfg.family, cfg.predictors);
    check_spec_names(cfg.error_spec, prep.predictors);
    const MeasurementErrorModel err{prep.delta(cfg.error_spec, cfg.delta_scale)};
    Vector Y = prep.Y;
    if (cfg.family == Family::linear) Y.array() -= Y.mean();
    BoostConfig bc;
    bc.tau = cfg.tau;
    bc.gamma = cfg.gamma;
    bc.iterations = cfg.iterations;
    bc.family = cfg.family;
    if (columns) *columns = prep.columns;
    return meboost_path(prep.W, Y, err, bc);
}

} // namespace meboost

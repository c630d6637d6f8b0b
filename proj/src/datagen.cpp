#include <meboost/datagen.hpp>

#include <cmath>

#include <fmt/format.h>

namespace meboost {
namespace {

enum class Stream : std::uint64_t { covariates = 1, measurement_error = 2, noise = 3 };

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Vector varying_variances(double base, double increment, int block_size, Index p)
{
    detail::require(block_size > 0, "error generator block_size must be positive");
    Vector v(p);
    for (Index j = 0; j < p; ++j) v(j) = base + increment * static_cast<double>(j % block_size + 1);
    return v;
}

Matrix block_correlated(const Vector& variances, double correlation, int block_size)
{
    const Index p = variances.size();
    Matrix S = Matrix::Zero(p, p);
    for (Index i = 0; i < p; ++i) {
        for (Index k = 0; k < p; ++k) {
            if (i / block_size != k / block_size) continue;
            const double sd = std::sqrt(variances(i) * variances(k));
            S(i, k) = i == k ? variances(i) : correlation * sd;
        }
    }
    return S;
}

// Factor F with F F' = S, tolerating zero-variance coordinates (their rows of F are zero).
Matrix covariance_factor(const Matrix& S)
{
    const Index p = S.rows();
    std::vector<Index> active;
    for (Index j = 0; j < p; ++j) {
        if (S(j, j) > 0.0) {
            active.push_back(j);
        } else if (S.row(j).cwiseAbs().maxCoeff() != 0.0) {
            throw InvalidArgument("error covariance has a zero-variance column with nonzero covariance");
        }
    }
    const Index m = static_cast<Index>(active.size());
    Matrix sub(m, m);
    for (Index a = 0; a < m; ++a)
        for (Index b = 0; b < m; ++b) sub(a, b) = S(active[a], active[b]);
    Eigen::LLT<Matrix> llt(sub);
    if (llt.info() != Eigen::Success) throw NumericalError("error covariance is not positive definite");
    const Matrix L = llt.matrixL();
    Matrix F = Matrix::Zero(p, p);
    for (Index a = 0; a < m; ++a)
        for (Index b = 0; b < m; ++b) F(active[a], active[b]) = L(a, b);
    return F;
}

Matrix draw_error(const ErrorGenerator& gen, Index n, Index p, Rng& rng)
{
    return std::visit(
        Overloaded{
            [&](const UniformError& g) -> Matrix {
                Matrix U(n, p);
                for (Index i = 0; i < n; ++i)
                    for (Index j = 0; j < p; ++j) U(i, j) = rng.uniform(g.lower, g.upper);
                return U;
            },
            [&](const ShiftedExponential& g) -> Matrix {
                Matrix U(n, p);
                for (Index i = 0; i < n; ++i)
                    for (Index j = 0; j < p; ++j) U(i, j) = rng.exponential(g.rate) - g.shift;
                return U;
            },
            [&](const auto& g) -> Matrix {
                const Matrix F = covariance_factor(error_covariance(g, p));
                return standard_normal_matrix(n, p, rng) * F.transpose();
            },
        },
        gen);
}

Matrix diagonal_delta(Index p, double variance)
{
    return variance * Matrix::Identity(p, p);
}

} // namespace

std::string_view generator_tag(const ErrorGenerator& gen)
{
    return std::visit(Overloaded{
                          [](const NormalIid&) { return std::string_view("normal-iid"); },
                          [](const NormalVaryingVariance&) {
                              return std::string_view("normal-varying-variance");
                          },
                          [](const NormalCorrelated&) { return std::string_view("normal-correlated"); },
                          [](const NormalVaryingCorrelated&) {
                              return std::string_view("normal-varying-correlated");
                          },
                          [](const NormalAlternatingZero&) {
                              return std::string_view("normal-alternating-zero");
                          },
                          [](const UniformError&) { return std::string_view("uniform"); },
                          [](const ShiftedExponential&) {
                              return std::string_view("shifted-exponential");
                          },
                      },
                      gen);
}

Matrix error_covariance(const ErrorGenerator& gen, Index p)
{
    return std::visit(
        Overloaded{
            [&](const NormalIid& g) -> Matrix { return diagonal_delta(p, g.variance); },
            [&](const NormalVaryingVariance& g) -> Matrix {
                return varying_variances(g.base, g.increment, g.block_size, p).asDiagonal();
            },
            [&](const NormalCorrelated& g) -> Matrix {
                return block_correlated(Vector::Constant(p, g.variance), g.correlation, g.block_size);
            },
            [&](const NormalVaryingCorrelated& g) -> Matrix {
                return block_correlated(varying_variances(g.base, g.increment, g.block_size, p),
                                        g.correlation, g.block_size);
            },
            [&](const NormalAlternatingZero& g) -> Matrix {
                Vector d(p);
                for (Index j = 0; j < p; ++j) d(j) = j % 2 == 0 ? 0.0 : g.variance;
                return d.asDiagonal();
            },
            [&](const UniformError& g) -> Matrix {
                const double w = g.upper - g.lower;
                return diagonal_delta(p, w * w / 12.0);
            },
            [&](const ShiftedExponential& g) -> Matrix {
                return diagonal_delta(p, 1.0 / (g.rate * g.rate));
            },
        },
        gen);
}

void ScenarioSpec::validate() const
{
    detail::require(n > 0 && p > 0, "scenario n and p must be positive");
    detail::require(block_size > 0 && p % block_size == 0, "p must be a multiple of block_size");
    detail::require(phi >= 0.0 && phi < 1.0, "phi must lie in [0, 1)");
    detail::require(sigma_eps >= 0.0, "sigma_eps must be nonnegative");
    detail::require(beta_true.size() == p, "beta_true must have length p");
    detail::require_square(delta_assumed, p, "delta_assumed", "ScenarioSpec");
    detail::require((delta_assumed - delta_assumed.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
                    "delta_assumed must be symmetric");
    detail::require(delta_assumed.diagonal().minCoeff() >= 0.0,
                    "delta_assumed must have a nonnegative diagonal");
    std::visit(Overloaded{
                   [](const UniformError& g) {
                       detail::require(g.upper > g.lower, "uniform error needs upper > lower");
                   },
                   [](const ShiftedExponential& g) {
                       detail::require(g.rate > 0.0, "exponential error rate must be positive");
                   },
                   [](const NormalCorrelated& g) {
                       detail::require(g.block_size > 0 && g.correlation > -1.0 && g.correlation < 1.0,
                                       "invalid correlated error parameters");
                   },
                   [](const NormalVaryingCorrelated& g) {
                       detail::require(g.block_size > 0 && g.correlation > -1.0 && g.correlation < 1.0,
                                       "invalid correlated error parameters");
                   },
                   [](const auto&) {},
               },
               error_generator);
    detail::require(error_covariance(error_generator, p).diagonal().minCoeff() >= 0.0,
                    "error generator produces negative variances");
}

std::string_view scenario_label(int scenario_id)
{
    switch (scenario_id) {
    case 1: return "Measurement error iid";
    case 2: return "Varying delta";
    case 3: return "Correlation in measurement error";
    case 4: return "Varying delta & correlation";
    case 5: return "Some delta=0";
    case 6: return "Overestimated delta";
    case 7: return "Underestimated delta";
    case 8: return "Misspecified Delta, ignores correlation";
    case 9: return "Measurement error from uniform distribution";
    case 10: return "Measurement error from asymmetric distribution";
    default: return "Custom scenario";
    }
}

Matrix build_block_covariance(Index p, Index block_size, double rho)
{
    detail::require(block_size > 0 && p > 0 && p % block_size == 0,
                    "p must be a positive multiple of block_size");
    detail::require(rho >= 0.0 && rho < 1.0, "block correlation must lie in [0, 1)");
    Matrix S = Matrix::Zero(p, p);
    for (Index b = 0; b < p; b += block_size) {
        S.block(b, b, block_size, block_size).setConstant(rho);
    }
    S.diagonal().setOnes();
    return S;
}

Matrix sample_mvn(Index n, const Matrix& Sigma, Rng& rng)
{
    detail::require(n >= 0, "sample size must be nonnegative");
    detail::require(Sigma.rows() == Sigma.cols() && Sigma.rows() > 0, "Sigma must be square");
    Eigen::LLT<Matrix> llt(Sigma);
    if (llt.info() != Eigen::Success) throw NumericalError("Sigma is not positive definite");
    const Matrix L = llt.matrixL();
    return standard_normal_matrix(n, Sigma.rows(), rng) * L.transpose();
}

Matrix sample_mvn(Index n, const Matrix& Sigma, std::uint64_t seed)
{
    Rng rng(seed);
    return sample_mvn(n, Sigma, rng);
}

ScenarioSpec default_scenario_spec(int scenario_id)
{
    if (scenario_id < 1 || scenario_id > 10)
        throw InvalidArgument(fmt::format("unknown scenario id {} (expected 1..10)", scenario_id));

    ScenarioSpec spec;
    spec.scenario_id = scenario_id;
    spec.beta_true = Vector::Zero(spec.p);
    spec.beta_true.head(10).setOnes();

    const double sd = std::sqrt(0.75);
    switch (scenario_id) {
    case 1: spec.error_generator = NormalIid{0.75}; break;
    case 2: spec.error_generator = NormalVaryingVariance{0.3375, 0.075, 10}; break;
    case 3: spec.error_generator = NormalCorrelated{0.75, 0.3, 10}; break;
    case 4: spec.error_generator = NormalVaryingCorrelated{0.3375, 0.075, 0.3, 10}; break;
    case 5: spec.error_generator = NormalAlternatingZero{0.75}; break;
    case 6:
    case 7: spec.error_generator = NormalIid{0.75}; break;
    case 8: spec.error_generator = NormalCorrelated{0.75, 0.3, 10}; break;
    case 9: spec.error_generator = UniformError{-1.5, 1.5}; break;
    case 10: spec.error_generator = ShiftedExponential{1.0 / sd, sd}; break;
    }

    switch (scenario_id) {
    case 6: spec.delta_assumed = diagonal_delta(spec.p, 1.5); break;
    case 7: spec.delta_assumed = diagonal_delta(spec.p, 0.375); break;
    case 8:
    case 9:
    case 10: spec.delta_assumed = diagonal_delta(spec.p, 0.75); break;
    default: spec.delta_assumed = error_covariance(spec.error_generator, spec.p); break;
    }
    return spec;
}

SimulatedDataset generate_scenario(const ScenarioSpec& spec, std::uint64_t seed, DatasetRole role)
{
    spec.validate();
    const auto role_key = static_cast<std::uint64_t>(role);
    Rng x_rng(derive_seed(seed, {role_key, static_cast<std::uint64_t>(Stream::covariates)}));
    Rng u_rng(derive_seed(seed, {role_key, static_cast<std::uint64_t>(Stream::measurement_error)}));
    Rng e_rng(derive_seed(seed, {role_key, static_cast<std::uint64_t>(Stream::noise)}));

    SimulatedDataset data;
    data.spec = spec;
    data.seed = seed;
    data.role = role;
    data.X = sample_mvn(spec.n, build_block_covariance(spec.p, spec.block_size, spec.phi), x_rng);
    data.W = data.X + draw_error(spec.error_generator, spec.n, spec.p, u_rng);
    Vector eps(spec.n);
    for (Index i = 0; i < spec.n; ++i) eps(i) = e_rng.normal();
    data.Y = data.X * spec.beta_true + spec.sigma_eps * eps;
    return data;
}

// JSON ------------------------------------------------------------------------------------

void to_json(nlohmann::json& j, const ErrorGenerator& gen)
{
    j = nlohmann::json::object();
    j["type"] = generator_tag(gen);
    std::visit(Overloaded{
                   [&](const NormalIid& g) { j["variance"] = g.variance; },
                   [&](const NormalVaryingVariance& g) {
                       j["base"] = g.base;
                       j["increment"] = g.increment;
                       j["block_size"] = g.block_size;
                   },
                   [&](const NormalCorrelated& g) {
                       j["variance"] = g.variance;
                       j["correlation"] = g.correlation;
                       j["block_size"] = g.block_size;
                   },
                   [&](const NormalVaryingCorrelated& g) {
                       j["base"] = g.base;
                       j["increment"] = g.increment;
                       j["correlation"] = g.correlation;
                       j["block_size"] = g.block_size;
                   },
                   [&](const NormalAlternatingZero& g) { j["variance"] = g.variance; },
                   [&](const UniformError& g) {
                       j["lower"] = g.lower;
                       j["upper"] = g.upper;
                   },
                   [&](const ShiftedExponential& g) {
                       j["rate"] = g.rate;
                       j["shift"] = g.shift;
                   },
               },
               gen);
}

void from_json(const nlohmann::json& j, ErrorGenerator& gen)
{
    const auto type = j.at("type").get<std::string>();
    if (type == "normal-iid") {
        gen = NormalIid{j.at("variance").get<double>()};
    } else if (type == "normal-varying-variance") {
        gen = NormalVaryingVariance{j.at("base").get<double>(), j.at("increment").get<double>(),
                                    j.at("block_size").get<int>()};
    } else if (type == "normal-correlated") {
        gen = NormalCorrelated{j.at("variance").get<double>(), j.at("correlation").get<double>(),
                               j.at("block_size").get<int>()};
    } else if (type == "normal-varying-correlated") {
        gen = NormalVaryingCorrelated{j.at("base").get<double>(), j.at("increment").get<double>(),
                                      j.at("correlation").get<double>(),
                                      j.at("block_size").get<int>()};
    } else if (type == "normal-alternating-zero") {
        gen = NormalAlternatingZero{j.at("variance").get<double>()};
    } else if (type == "uniform") {
        gen = UniformError{j.at("lower").get<double>(), j.at("upper").get<double>()};
    } else if (type == "shifted-exponential") {
        gen = ShiftedExponential{j.at("rate").get<double>(), j.at("shift").get<double>()};
    } else {
        throw InvalidArgument(fmt::format("unknown error generator type '{}'", type));
    }
}

void to_json(nlohmann::json& j, const ScenarioSpec& spec)
{
    std::vector<std::vector<double>> delta(static_cast<std::size_t>(spec.delta_assumed.rows()));
    for (Index i = 0; i < spec.delta_assumed.rows(); ++i) {
        const Vector row = spec.delta_assumed.row(i);
        delta[static_cast<std::size_t>(i)].assign(row.data(), row.data() + row.size());
    }
    j = nlohmann::json{
        {"scenario_id", spec.scenario_id},
        {"n", spec.n},
        {"p", spec.p},
        {"block_size", spec.block_size},
        {"phi", spec.phi},
        {"beta_true", std::vector<double>(spec.beta_true.data(),
                                          spec.beta_true.data() + spec.beta_true.size())},
        {"sigma_eps", spec.sigma_eps},
        {"error_generator", spec.error_generator},
        {"delta_assumed", delta},
    };
}

void from_json(const nlohmann::json& j, ScenarioSpec& spec)
{
    spec.scenario_id = j.at("scenario_id").get<int>();
    spec.n = j.at("n").get<Index>();
    spec.p = j.at("p").get<Index>();
    spec.block_size = j.at("block_size").get<Index>();
    spec.phi = j.at("phi").get<double>();
    const auto beta = j.at("beta_true").get<std::vector<double>>();
    spec.beta_true = Eigen::Map<const Vector>(beta.data(), static_cast<Index>(beta.size()));
    spec.sigma_eps = j.at("sigma_eps").get<double>();
    spec.error_generator = j.at("error_generator").get<ErrorGenerator>();
    const auto delta = j.at("delta_assumed").get<std::vector<std::vector<double>>>();
    spec.delta_assumed.resize(static_cast<Index>(delta.size()), static_cast<Index>(delta.size()));
    for (std::size_t r = 0; r < delta.size(); ++r) {
        if (delta[r].size() != delta.size()) throw InvalidArgument("delta_assumed must be square");
        for (std::size_t c = 0; c < delta.size(); ++c)
            spec.delta_assumed(static_cast<Index>(r), static_cast<Index>(c)) = delta[r][c];
    }
}

} // namespace meboost

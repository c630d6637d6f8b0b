#include <meboost/standardize.hpp>

#include <cmath>

#include <fmt/format.h>

namespace meboost {

Standardization Standardization::fit(const Matrix& X)
{
    detail::require(X.rows() > 1, "standardization needs at least two rows");
    Standardization s;
    s.mean = X.colwise().mean().transpose();
    s.scale.resize(X.cols());
    for (Index j = 0; j < X.cols(); ++j) {
        const double var = (X.col(j).array() - s.mean(j)).square().mean();
        if (!(var > 0.0)) throw DataError(fmt::format("column {} is constant and cannot be standardized", j + 1));
        s.scale(j) = std::sqrt(var);
    }
    return s;
}

Matrix Standardization::apply(const Matrix& X) const
{
    detail::require_cols(X, mean.size(), "X", "Standardization::apply");
    return (X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

RawCoefficients destandardize(const Vector& beta, const Standardization& s, double offset)
{
    detail::require(beta.size() == s.scale.size(), "destandardize: coefficient length mismatch");
    RawCoefficients raw;
    raw.slopes = beta.cwiseQuotient(s.scale);
    raw.intercept = offset - raw.slopes.dot(s.mean);
    return raw;
}

} // namespace meboost

#pragma once
#include <meboost/common.hpp>

namespace meboost {

/// Column centering and scaling to zero mean and unit (population) variance.
struct Standardization {
    Vector mean;
    Vector scale;

    static Standardization fit(const Matrix& X);
    Matrix apply(const Matrix& X) const;
};

struct RawCoefficients {
    double intercept = 0.0;
    Vector slopes;
};

/// Coefficients on the raw scale for a linear predictor offset + sum_j beta_j (x_j - m_j) / s_j.
/// For a centered linear outcome the offset is mean(Y); for a model with an explicit intercept
/// column it is that column's coefficient.
RawCoefficients destandardize(const Vector& beta, const Standardization& s, double offset);

} // namespace meboost

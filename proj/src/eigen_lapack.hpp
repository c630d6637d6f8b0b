#pragma once
#include <meboost/common.hpp>

namespace meboost::detail {

/// Eigenpairs of a symmetric matrix with eigenvalue <= upper (columns of `vectors`).
struct LowSpectrum {
    Vector values;
    Matrix vectors;
};

LowSpectrum eigenpairs_at_most(const Matrix& A, double upper);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& A);

/// False when the LAPACK eigensolver failed its self-check and Eigen is used instead.
bool lapack_eigensolver_in_use();

} // namespace meboost::detail

#include "eigen_lapack.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <lapacke.h>

namespace meboost::detail {
namespace {

bool lapack_full(const Matrix& A, Vector& w, Matrix& z)
{
    const auto p = static_cast<lapack_int>(A.rows());
    Matrix work = A;
    w.resize(p);
    z.resize(p, p);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(p));
    lapack_int found = 0;
    const lapack_int info =
        LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'A', 'L', p, work.data(), p, 0.0, 0.0, 0, 0, 0.0,
                       &found, w.data(), z.data(), p, support.data());
    return info == 0 && found == p;
}

// Some OpenBLAS builds select kernels that return wrong decompositions on newer CPUs.
// The LAPACK path is used only after it reproduces a deterministic test matrix.
bool lapack_trusted()
{
    static const bool trusted = [] {
        const Index p = 256;
        Matrix A(p, p);
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j <= i; ++j)
                A(i, j) = A(j, i) = std::sin(static_cast<double>(7 * i + 3 * j + 1)) + (i == j ? 2.0 : 0.0);
        Vector w;
        Matrix z;
        if (!lapack_full(A, w, z)) return false;
        const double err = (z * w.asDiagonal() * z.transpose() - A).cwiseAbs().maxCoeff();
        const double orth = (z.transpose() * z - Matrix::Identity(p, p)).cwiseAbs().maxCoeff();
        return err <= 1e-9 * A.cwiseAbs().maxCoeff() * static_cast<double>(p) && orth <= 1e-9;
    }();
    return trusted;
}

} // namespace

LowSpectrum eigenpairs_at_most(const Matrix& A, double upper)
{
    const Index p = A.rows();
    LowSpectrum out;
    if (p == 0) return out;
    // The full MRRR decomposition is faster than the value-range variant, which falls back to
    // bisection and inverse iteration.
    Vector w;
    Matrix z;
    if (lapack_trusted()) {
        if (!lapack_full(A, w, z)) throw NumericalError("symmetric eigensolver (dsyevr) failed");
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(A);
        if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
        w = es.eigenvalues();
        z = es.eigenvectors();
    }
    Index k = 0;
    while (k < p && w(k) <= upper) ++k;
    out.values = w.head(k);
    out.vectors = z.leftCols(k);
    return out;
}

double min_eigenvalue(const Matrix& A)
{
    const auto p = static_cast<lapack_int>(A.rows());
    detail::require(p > 0, "min_eigenvalue: empty matrix");
    if (!lapack_trusted()) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
        return es.eigenvalues()(0);
    }
    Matrix work = A;
    Vector w(p);
    lapack_int found = 0;
    std::vector<lapack_int> support(2);
    double dummy = 0.0;
    const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'N', 'I', 'L', p, work.data(), p, 0.0,
                                           0.0, 1, 1, 0.0, &found, w.data(), &dummy, 1,
                                           support.data());
    if (info != 0 || found < 1) throw NumericalError("symmetric eigensolver (dsyevr) failed");
    return w(0);
}

bool lapack_eigensolver_in_use()
{
    return lapack_trusted();
}

} // namespace meboost::detail

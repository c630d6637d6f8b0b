#pragma once
#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <string_view>

namespace meboost {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Family { linear, poisson };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied an invalid argument (bad dimension, out-of-range parameter).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Input data is malformed (CSV content, missing columns, bad values).
class DataError : public Error {
public:
    using Error::Error;
};

/// A numerical routine failed (factorization, divergence, non-convergence).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Poisson corrected score exponent exceeded the overflow guard.
class ScoreDivergence : public NumericalError {
public:
    ScoreDivergence(Index row, double exponent);
    Index row() const noexcept { return row_; }
    double exponent() const noexcept { return exponent_; }

private:
    Index row_;
    double exponent_;
};

namespace detail {

inline void require(bool condition, std::string_view message)
{
    if (!condition) throw InvalidArgument(std::string(message));
}

void require_rows(const Matrix& W, const Vector& Y, std::string_view where);
void require_cols(const Matrix& W, Index p, std::string_view what, std::string_view where);
void require_square(const Matrix& M, Index p, std::string_view what, std::string_view where);

} // namespace detail
} // namespace meboost

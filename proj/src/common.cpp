#include <meboost/common.hpp>

#include <fmt/format.h>

namespace meboost {

std::string_view to_string(Family family)
{
    return family == Family::linear ? "linear" : "poisson";
}

Family parse_family(std::string_view name)
{
    if (name == "linear") return Family::linear;
    if (name == "poisson") return Family::poisson;
    throw InvalidArgument(fmt::format("unknown family '{}' (expected linear or poisson)", name));
}

ScoreDivergence::ScoreDivergence(Index row, double exponent)
    : NumericalError(fmt::format("Poisson score diverged: exponent {:.6g} exceeds 700 at row {}",
                                 exponent, row))
    , row_(row)
    , exponent_(exponent)
{}

namespace detail {

void require_rows(const Matrix& W, const Vector& Y, std::string_view where)
{
    if (W.rows() != Y.size())
        throw InvalidArgument(fmt::format("{}: W has {} rows but Y has {} entries", where,
                                          W.rows(), Y.size()));
}

void require_cols(const Matrix& W, Index p, std::string_view what, std::string_view where)
{
    if (W.cols() != p)
        throw InvalidArgument(fmt::format("{}: W has {} columns but {} has length {}", where,
                                          W.cols(), what, p));
}

void require_square(const Matrix& M, Index p, std::string_view what, std::string_view where)
{
    if (M.rows() != p || M.cols() != p)
        throw InvalidArgument(fmt::format("{}: {} is {}x{}, expected {}x{}", where, what,
                                          M.rows(), M.cols(), p, p));
}

} // namespace detail
} // namespace meboost

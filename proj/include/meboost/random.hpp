#pragma once
#include <cstdint>
#include <initializer_list>
#include <random>

#include <meboost/common.hpp>

namespace meboost {

/// SplitMix64 finalizer; used to derive statistically independent substream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of substream `keys...` of `seed`. Distinct key tuples give independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept;

/// Seeded generator with platform-independent variate transforms.
///
/// The engine is std::mt19937_64 (bit-exact by the standard); uniforms take the top 53 bits
/// and normals use Box-Muller, so streams are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform();
    double uniform(double lower, double upper) { return lower + (upper - lower) * uniform(); }
    double normal();
    double exponential(double rate);
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// n x p matrix of standard normals, filled row by row.
Matrix standard_normal_matrix(Index n, Index p, Rng& rng);

} // namespace meboost

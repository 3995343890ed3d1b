#pragma once

#include <cstdint>
#include <random>

namespace cbayes {

/// Seeded random stream. The engine is mt19937_64, whose output sequence is
/// fixed by the standard; every variate transform is implemented here rather
/// than through <random> distributions, whose algorithms are
/// implementation-defined. Same seed, same numbers, on any conforming
/// toolchain.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t draws() const noexcept { return draws_; }

    /// Independent child stream; children of equal index are identical.
    RngStream split(std::uint64_t index) const;

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1); never returns 0.
    double uniform_open();
    double uniform(double lower, double upper);
    double standard_normal();
    double normal(double mean, double stddev) { return mean + stddev * standard_normal(); }
    /// Gamma(shape, scale = 1) by Marsaglia-Tsang.
    double gamma(double shape);
    double beta(double alpha, double beta);
    std::uint64_t uniform_index(std::uint64_t n);

private:
    std::uint64_t seed_;
    std::uint64_t draws_ = 0;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace cbayes

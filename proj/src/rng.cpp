#include "cbayes/rng.hpp"

#include <cmath>

#include "cbayes/error.hpp"

namespace cbayes {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

RngStream RngStream::split(std::uint64_t index) const {
    return RngStream(splitmix64(seed_ ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

std::uint64_t RngStream::next_u64() {
    ++draws_;
    return engine_();
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double lower, double upper) {
    return lower + (upper - lower) * uniform();
}

double RngStream::standard_normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Marsaglia polar method.
    double u = 0.0, v = 0.0, s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

double RngStream::gamma(double shape) {
    require(shape > 0.0, ErrorKind::Input, "gamma shape must be positive");
    if (shape < 1.0) {
        // Boost to shape + 1 and rescale by U^(1/shape).
        const double g = gamma(shape + 1.0);
        return g * std::pow(uniform_open(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0, v = 0.0;
        do {
            x = standard_normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform_open();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double RngStream::beta(double alpha, double beta_param) {
    const double x = gamma(alpha);
    const double y = gamma(beta_param);
    return x / (x + y);
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
    require(n > 0, ErrorKind::Input, "uniform_index needs n > 0");
    // Rejection keeps the result exactly uniform.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = 0;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

}  // namespace cbayes

#include "sfs/rng.hpp"

#include <cmath>

#include "sfs/errors.hpp"

namespace sfs {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngStream RngStream::derive(std::uint64_t seed, std::uint64_t stream_id) {
    return RngStream(splitmix64(seed) ^ splitmix64(stream_id * 0x9e3779b97f4a7c15ULL + 0x6a09e667f3bcc909ULL));
}

RngStream RngStream::derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return derive(splitmix64(seed) ^ splitmix64(a + 0x243f6a8885a308d3ULL), b);
}

double RngStream::uniform01() {
    // 53 mantissa bits, centered so 0 and 1 are never returned.
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_below(std::uint64_t n) {
    if (n == 0) throw ConfigError("uniform_below: n must be positive");
    if (n == 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = eng_();
    } while (x >= limit);
    return x % n;
}

double RngStream::normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

double RngStream::gamma(double shape) {
    if (!(shape > 0.0)) throw ConfigError("gamma: shape must be positive");
    if (shape < 1.0) {
        // Boost: Gamma(a) = Gamma(a+1) * U^(1/a).
        const double g = gamma(shape + 1.0);
        return g * std::pow(uniform01(), 1.0 / shape);
    }
    // Marsaglia-Tsang.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double RngStream::beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
}

namespace {

// Sequential inversion; expected mean+1 uniforms, used for small means.
std::uint64_t poisson_inversion(double mean, RngStream& rng) {
    const double l = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= rng.uniform01();
    } while (p > l);
    return k - 1;
}

// Hormann's PTRS transformed rejection; valid for mean >= 10.
std::uint64_t poisson_ptrs(double mean, RngStream& rng) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform01() - 0.5;
        const double v = rng.uniform01();
        const double us = 0.5 - std::abs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            kf * loglam - mean - std::lgamma(kf + 1.0)) {
            return static_cast<std::uint64_t>(kf);
        }
    }
}

}  // namespace

std::uint64_t RngStream::poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean)) throw ConfigError("poisson: mean must be finite and nonnegative");
    if (mean == 0.0) return 0;
    if (mean < 10.0) return poisson_inversion(mean, *this);
    return poisson_ptrs(mean, *this);
}

}  // namespace sfs

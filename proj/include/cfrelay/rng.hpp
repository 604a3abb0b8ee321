// SPDX-License-Identifier: Apache-2.0
//
// Keyed random streams. Each consumer (AP placement, user placement, shadowing
// per AP, channel draw per realization) gets its own engine seeded from
// (seed, stream, index), so draws never depend on evaluation order.

#ifndef CFRELAY_RNG_HPP
#define CFRELAY_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>

namespace cfrelay
{

enum class Stream : std::uint64_t
{
    kApPositions = 1,
    kUserPositions = 2,
    kShadowing = 3,
    kChannel = 4,
    kBootstrap = 5,
    kInstance = 6,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_key(std::uint64_t seed, Stream stream, std::uint64_t index)
{
    return mix64(mix64(mix64(seed) ^ static_cast<std::uint64_t>(stream)) + index);
}

class Rng
{
public:
    Rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0)
        : engine_(derive_key(seed, stream, index)) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() { return normal_(engine_); }

    /// Circularly-symmetric complex Gaussian with the given total variance.
    std::complex<double> complex_normal(double variance)
    {
        const double s = std::sqrt(variance / 2.0);
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {s * re, s * im};
    }

    std::uint64_t next() { return engine_(); }

    std::mt19937_64 &engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace cfrelay

#endif

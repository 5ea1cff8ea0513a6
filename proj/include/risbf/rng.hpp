// SPDX-License-Identifier: Apache-2.0
//
// risbf - joint receive antenna selection and beamforming for RIS-aided
// multiuser MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef RISBF_RNG_HPP
#define RISBF_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>

namespace risbf {

// Every random quantity in the library is drawn from a (seed, stream)
// addressed generator: mt19937_64 keyed by splitmix64(seed ^ stream), with
// an explicit Box-Muller map for normals. mt19937_64's output sequence is
// fixed by the C++ standard and no std::*_distribution is used, so draws
// are bitwise reproducible for a given (seed, stream) on any conforming
// implementation.

namespace stream {
constexpr std::uint64_t kRisToBs = 0x01;       // channel G
constexpr std::uint64_t kUserToRisBase = 0x10; // channel H_k uses kUserToRisBase + k
constexpr std::uint64_t kPddInit = 0x100;
constexpr std::uint64_t kSoInit = 0x200;
constexpr std::uint64_t kRandomScheme = 0x300;
} // namespace stream

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class RandomStream {
  public:
    RandomStream(std::uint64_t seed, std::uint64_t stream)
        : engine_(splitmix64(seed ^ splitmix64(stream))) {}

    std::uint64_t next_raw() { return engine_(); }

    /// Uniform double in [0, 1).
    double next_uniform() { return double(next_raw() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = next_raw();
        } while (r >= limit);
        return r % n;
    }

    /// Standard normal via Box-Muller; second value of each pair is cached.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u in (0, 1] so the log is finite
        const double u = double((next_raw() >> 11) + 1) * 0x1.0p-53;
        const double v = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 2.0 * 3.14159265358979323846 * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Circularly symmetric complex Gaussian with the given total variance.
    std::complex<double> next_cgauss(double variance) {
        const double s = std::sqrt(variance * 0.5);
        return {s * next_normal(), s * next_normal()};
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace risbf

#endif // RISBF_RNG_HPP

// Portable, seedable Gaussian draws: mt19937_64 (bit-exact by the
// standard) feeding a fixed Box-Muller transform, so coupling tables
// reproduce across platforms and compilers.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sre {

class GaussianSource {
  public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    // Standard normal via Box-Muller (cosine branch only; one normal
    // consumes two 64-bit draws, keeping the stream layout trivial).
    double standard_normal() {
        const double u1 = unit_open();
        const double u2 = unit_open();
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    double normal(double mean, double stddev) {
        return mean + stddev * standard_normal();
    }

  private:
    // Uniform on (0,1), never exactly 0 or 1.
    double unit_open() {
        const std::uint64_t r = engine_();
        return (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;
    }

    std::mt19937_64 engine_;
};

}  // namespace sre

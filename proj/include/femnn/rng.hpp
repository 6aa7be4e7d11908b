#pragma once

#include <cmath>
#include <cstdint>

namespace femnn {

// Deterministic, stdlib-independent RNG so outputs are byte-identical across
// toolchains. splitmix64 state advance, named sub-streams derived by hashing.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller, no cached spare so the draw count per call is fixed.
    double normal(double mean, double std) {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + std * r * std::cos(2.0 * M_PI * u2);
    }

    // Inverse-CDF Weibull with scale lambda and shape k.
    double weibull(double lambda, double shape) {
        double u = uniform01();
        while (u >= 1.0) u = uniform01();
        return lambda * std::pow(-std::log1p(-u), 1.0 / shape);
    }

    // Independent sub-stream; stream equality only depends on (seed, tag, index).
    Rng derive(std::uint64_t tag, std::uint64_t index = 0) const {
        std::uint64_t h = state_;
        h ^= 0x2545f4914f6cdd1dull + tag * 0x9e3779b97f4a7c15ull;
        h = (h ^ (h >> 29)) * 0xff51afd7ed558ccdull;
        h ^= index * 0xc4ceb9fe1a85ec53ull;
        h = (h ^ (h >> 32)) * 0xc2b2ae3d27d4eb4full;
        return Rng(h ^ (h >> 29));
    }

  private:
    std::uint64_t state_;
};

// Stream tags used throughout; keeps init/sampling/mc independently reproducible.
namespace rng_stream {
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t sampling = 2;
inline constexpr std::uint64_t mc = 3;
inline constexpr std::uint64_t noise = 4;
inline constexpr std::uint64_t holdout = 5;
}  // namespace rng_stream

}  // namespace femnn

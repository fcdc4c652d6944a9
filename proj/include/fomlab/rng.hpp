#pragma once

#include <cmath>
#include <cstdint>

#include "fomlab/core.hpp"

namespace fomlab {

namespace detail {
inline std::uint64_t splitmix_finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Counter-based generator keyed by (master seed, stream index).
///
/// Every (seed, stream) pair yields an independent sequence, so parallel
/// workers draw from disjoint substreams and the merged result does not
/// depend on scheduling. The core is the SplitMix64 sequence with a keyed
/// starting counter.
class SplitRng {
  public:
    explicit SplitRng(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(detail::splitmix_finalize(seed + 0x9e3779b97f4a7c15ull) ^
                 detail::splitmix_finalize(stream * 0xda942042e4dd58b5ull + 0x2545f4914f6cdd1dull)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return detail::splitmix_finalize(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (fixed two-uniform consumption).
    double next_normal() {
        double u1 = next_uniform();
        while (u1 == 0.0) u1 = next_uniform();
        const double u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    /// Poisson count: inversion by sequential search for small means,
    /// PTRS transformed rejection (Hormann 1993) above.
    long next_poisson(double mean) {
        if (!(mean > 0.0) || !std::isfinite(mean)) throw DomainError("next_poisson: mean must be positive and finite");
        if (mean < 10.0) return poisson_inversion(mean);
        return poisson_ptrs(mean);
    }

  private:
    long poisson_inversion(double mean) {
        const double target = next_uniform();
        double p = std::exp(-mean);
        double cdf = p;
        long k = 0;
        while (target > cdf && k < 2000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

    long poisson_ptrs(double mean) {
        const double slam = std::sqrt(mean);
        const double llam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = next_uniform() - 0.5;
            const double v = next_uniform();
            const double us = 0.5 - std::fabs(u);
            const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= vr) return static_cast<long>(k);
            if (k < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
                k * llam - mean - std::lgamma(k + 1.0)) {
                return static_cast<long>(k);
            }
        }
    }

    std::uint64_t state_;
};

}  // namespace fomlab

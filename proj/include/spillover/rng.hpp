#pragma once

// Small self-contained RNG (xoshiro256++ seeded through splitmix64) with a
// fixed-consumption Gaussian draw. Substreams are derived from (seed, tags),
// so every Monte Carlo work item owns an independent, reproducible stream
// regardless of execution order.

#include <cmath>
#include <cstdint>

namespace spillover {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    /// Stream keyed by a seed and up to two tags (e.g. noise-level index and
    /// dataset index).
    explicit Rng(std::uint64_t seed, std::uint64_t tag1 = 0, std::uint64_t tag2 = 0) {
        std::uint64_t sm = seed;
        sm ^= 0x6a09e667f3bcc909ULL + splitmix64(sm) + (tag1 << 1);
        sm ^= 0xbb67ae8584caa73bULL + splitmix64(sm) + (tag2 << 1);
        for (auto& w : state_) w = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; consumes exactly two uniforms per pair.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        const double u2 = next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4] = {};
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace spillover

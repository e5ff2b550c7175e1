// Deterministic sampling helpers.  All randomized paths in the library
// (frame sampling, K estimation, test sampling) draw from this wrapper so
// fixed seeds reproduce byte-identical output; distribution code is ours
// rather than the standard library's unspecified implementations.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pettis {

class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t u64() { return eng_(); }

    /// Uniform in [0, n) by rejection.
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = u64();
        } while (v >= limit);
        return v % n;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double real01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * real01() - 1.0;
            v = 2.0 * real01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    /// Independent stream for a labeled subtask (splitmix64 of seed ^ label).
    static uint64_t derive(uint64_t seed, uint64_t label) {
        uint64_t z = seed ^ (label + 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace pettis

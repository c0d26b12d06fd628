#pragma once

#include <cstdint>

namespace orblin {

// SplitMix64 stream. Chosen over std:: distributions so that generated
// datasets are bit-identical across standard library versions.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Standard normal via Box-Muller (one value per call, no caching, so the
    // stream position is a pure function of the call count).
    double gaussian();

  private:
    std::uint64_t state_;
};

// Stream-splitting rule: per-IC seed = mix of master seed and IC index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace orblin

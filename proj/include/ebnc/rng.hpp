#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ebnc {

// Deterministic random source. All randomized operations in the library go
// through this wrapper so that results depend only on the seed, not on
// platform-specific distribution implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Rejection sampling keeps the draw unbiased.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t value = engine_();
        while (value >= limit) value = engine_();
        return value % n;
    }

    // Index into a discrete distribution given by probabilities summing to 1.
    int categorical(const std::vector<double>& probabilities) {
        const double u = uniform();
        double cumulative = 0.0;
        for (std::size_t i = 0; i + 1 < probabilities.size(); ++i) {
            cumulative += probabilities[i];
            if (u < cumulative) return static_cast<int>(i);
        }
        return static_cast<int>(probabilities.size()) - 1;
    }

    // Derive an independent stream; used so that per-restart / per-node draws
    // do not depend on evaluation order.
    Rng fork(std::uint64_t stream) {
        return Rng(engine_() ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace ebnc

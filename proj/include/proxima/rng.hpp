#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace proxima {

/// Deterministic 64-bit PRNG (splitmix64 core).
///
/// All randomness in the toolkit flows through this generator so that runs
/// are reproducible across platforms and thread counts. Independent
/// substreams are derived from a (seed, key) pair, which lets parallel work
/// items (bootstrap resamples, synthetic experiments) draw from their own
/// stream regardless of scheduling order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed ^ kGolden)) {}

    /// Substream keyed on (seed, key). Streams with distinct keys are
    /// statistically independent.
    static Rng stream(std::uint64_t seed, std::uint64_t key) {
        Rng r(0);
        r.state_ = mix(mix(seed ^ kGolden) + mix(key + kGolden));
        return r;
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += kGolden);
        return mix(z);
    }

    /// Uniform double in [0, 1), 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Unbiased via rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    bool bernoulli(double p) { return next_unit() < p; }

    /// Gaussian draw via Box-Muller. Consumes exactly two uniforms; no
    /// cached state, so draw sequences stay independent of call sites.
    double normal(double mean, double sd) {
        double u1 = 1.0 - next_unit();  // (0, 1]
        double u2 = next_unit();
        double radius = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * radius * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace proxima

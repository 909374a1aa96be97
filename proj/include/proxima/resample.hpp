#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "proxima/scoring.hpp"

namespace proxima {

struct BootstrapConfig {
    std::size_t num_resamples = 1000;
    double alpha = 0.05;  // central (1 - alpha) interval
    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate() const;
};

struct BootstrapResult {
    double ci_low = 0.0;
    double ci_high = 0.0;
    // Composite reliability of each resample, in resample-index order.
    std::vector<double> resample_values;
    // Resamples whose drawn experiments had a constant tau series, scored
    // with the 0.5 correlation fallback.
    std::size_t degenerate_correlation_count = 0;
};

/// Percentile bootstrap over experiments: each resample draws
/// num_experiments experiment ids with replacement, recomputes the three
/// components on the drawn multiset (segment cells travel with their
/// experiment and count once per draw), and rescoring yields one composite
/// value. The interval is the nearest-rank alpha/2 and 1-alpha/2 percentiles.
/// Resample b uses its own RNG stream keyed by (seed, b), so results do not
/// depend on the thread count.
BootstrapResult bootstrap_ci(const EffectTable& table, const std::string& proxy,
                             const std::string& long_term, const Weights& weights,
                             const BootstrapConfig& config);

}  // namespace proxima

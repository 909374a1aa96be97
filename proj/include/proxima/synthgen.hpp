#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "proxima/corpus.hpp"

namespace proxima {

/// Recipe for a synthetic corpus with known effects. Per experiment a true
/// long-term effect is drawn; per segment the true proxy effect is
/// proxy_gain * long_effect + noise, negated with the segment's flip
/// probability. Units then scatter around their arm mean.
struct SynthConfig {
    std::size_t num_experiments = 10;
    std::size_t units_per_arm = 100;
    std::size_t num_segments = 4;

    double long_effect_mean = 1.0;
    double long_effect_sd = 0.5;
    double proxy_gain = 1.0;
    double proxy_noise_sd = 0.0;

    // Per-label flip probability; labels missing from the map use the
    // scalar default.
    std::map<std::string, double> segment_flip_prob;
    double default_flip_prob = 0.0;

    double unit_noise_sd = 1.0;

    // Bernoulli mode emits 0/1 outcomes with the effect applied to the
    // success rate — the shape of visit/conversion metrics. unit_noise_sd is
    // ignored there.
    bool bernoulli = false;
    double bernoulli_base = 0.05;

    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate() const;
};

struct SegmentTruth {
    double proxy_effect = 0.0;
    bool planted_flip = false;  // sign(proxy_effect) != sign(long_effect)
};

struct ExperimentTruth {
    std::string experiment_id;
    double long_effect = 0.0;
    std::vector<SegmentTruth> segments;  // indexed like GroundTruth::segment_labels
};

/// What the generator planted, plus the component scores a perfect
/// estimator would recover from it.
struct GroundTruth {
    std::vector<ExperimentTruth> experiments;
    std::vector<std::string> segment_labels;

    // Pearson correlation of (unit-weighted true proxy ATE, true long-term
    // ATE) across experiments; NaN with fewer than two experiments or a
    // constant series.
    double implied_rho = 0.0;
    double implied_da = 0.0;
    // Exact fraction of planted-flip flags over all (experiment, segment)
    // pairs — the realised plant, not the configured probability.
    double implied_fr = 0.0;
};

struct SynthOutput {
    ExperimentCorpus corpus;
    GroundTruth truth;
};

/// Deterministic given the seed; experiments draw from independent
/// counter-based streams, so the thread count never changes the output.
/// Metric columns are named "proxy" and "long_term"; segments are labeled
/// "q0".."q{S-1}" and dealt round-robin within each arm.
SynthOutput generate(const SynthConfig& config);

}  // namespace proxima

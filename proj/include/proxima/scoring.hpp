#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proxima/effects.hpp"

namespace proxima {

/// Weights of the three reliability components. They must be non-negative
/// and sum to one.
struct Weights {
    double w_corr = 0.6;
    double w_da = 0.2;
    double w_fr = 0.2;

    void validate() const;
    static Weights defaults() { return {}; }

    bool operator==(const Weights&) const = default;
};

struct CorrelationScore {
    double corr_norm = 0.5;          // (rho + 1) / 2, or 0.5 when rho is undefined
    std::optional<double> raw_rho;   // unset when either tau series is constant
};

/// Pearson correlation of per-experiment proxy vs long-term effects, mapped
/// from [-1, 1] onto [0, 1]. A constant series has no direction to agree or
/// disagree with, so the score falls back to the midpoint 0.5.
CorrelationScore normalized_correlation(std::span<const double> proxy_taus,
                                        std::span<const double> long_term_taus);

/// Fraction of experiments whose proxy effect sign matches the long-term
/// effect sign (sign(0) = 0, so a zero only matches a zero).
double directional_accuracy(std::span<const double> proxy_taus,
                            std::span<const double> long_term_taus);

struct FragilityRate {
    double rate = 0.0;
    std::size_t num_flips = 0;
    std::size_t num_segments_counted = 0;  // markers excluded
};

/// Share of (experiment, segment) cells whose proxy effect sign disagrees
/// with that experiment's global long-term sign. Cells carrying
/// insufficient-data markers are left out of both numerator and denominator;
/// with no countable cells the rate is 0.
FragilityRate fragility_rate(const EffectTable& table, const std::string& proxy,
                             const std::string& long_term);

struct ComponentScores {
    double corr_norm = 0.5;
    std::optional<double> raw_rho;
    double dir_acc = 0.0;
    double frag_rate = 0.0;
    std::size_t num_experiments = 0;
    std::size_t num_segments_counted = 0;
    std::size_t num_flips = 0;
};

/// R = w_corr * corr_norm + w_da * dir_acc + w_fr * (1 - frag_rate).
/// Always in [0, 1] for valid weights.
double composite(const ComponentScores& scores, const Weights& weights);

struct ReliabilityReport {
    std::string proxy;
    ComponentScores components;
    double reliability = 0.0;
    // Filled in by the bootstrap when one is run.
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    std::vector<std::string> warnings;
};

/// Scores every schema proxy against the long-term metric. Requires at least
/// two experiments; degenerate component inputs (constant tau series, no
/// countable segment cells) are scored with their documented fallbacks and
/// flagged in the per-proxy warnings.
std::vector<ReliabilityReport> score_all(const EffectTable& table, const MetricSchema& schema,
                                         const Weights& weights);

}  // namespace proxima

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proxima/corpus.hpp"

namespace proxima {

/// Sign with a hard zero: exactly-zero effects are neither lifts nor drops.
inline int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

/// Two-arm comparison for one metric in one experiment.
struct EffectEstimate {
    double tau = 0.0;  // mean(treatment) - mean(control)
    double mean_treat = 0.0;
    double mean_ctrl = 0.0;
    double var_treat = 0.0;  // unbiased, 0 when the arm has a single unit
    double var_ctrl = 0.0;
    std::size_t n_treat = 0;
    std::size_t n_ctrl = 0;
    // Unset when the statistic is undefined (zero pooled spread or an arm of
    // size one for the t-test).
    std::optional<double> t_stat;
    std::optional<double> p_value;
    std::optional<double> cohen_d;

    bool operator==(const EffectEstimate&) const = default;
};

struct WelchStat {
    double t = 0.0;
    double p = 1.0;  // two-sided
};

/// Welch's unequal-variance t statistic with a Student-t two-sided p-value.
/// Undefined when either arm has fewer than two units or both sample
/// variances are zero.
std::optional<WelchStat> welch_t(const EffectEstimate& est);

/// Cohen's d with the (n_t - 1, n_c - 1)-weighted pooled standard deviation.
/// Undefined when the pooled variance is zero or both arms are singletons.
std::optional<double> cohens_d(const EffectEstimate& est);

/// Difference in means plus the derived statistics above.
EffectEstimate ate(std::span<const double> treat_values, std::span<const double> ctrl_values);

/// Effects for one (experiment, segment) pair across every schema metric,
/// indexed like EffectTable::metric_names(). A disengaged optional marks a
/// segment whose treatment or control arm is below the minimum arm size.
struct SegmentEffects {
    std::string label;
    std::vector<std::optional<EffectEstimate>> by_metric;

    bool operator==(const SegmentEffects&) const = default;
};

struct ExperimentEffects {
    std::string experiment_id;
    std::vector<EffectEstimate> global;  // indexed like metric_names()
    std::vector<SegmentEffects> segments;  // sorted by label; only segments present

    bool operator==(const ExperimentEffects&) const = default;
};

/// Per-experiment global and per-segment effect estimates for every schema
/// metric (proxies plus the long-term metric; feature columns are not
/// estimated).
class EffectTable {
public:
    EffectTable(std::vector<std::string> metric_names,
                std::vector<ExperimentEffects> experiments, std::size_t min_segment_arm);

    const std::vector<std::string>& metric_names() const { return metric_names_; }
    std::size_t metric_index(const std::string& name) const;
    const std::vector<ExperimentEffects>& experiments() const { return experiments_; }
    std::size_t num_experiments() const { return experiments_.size(); }
    std::size_t min_segment_arm() const { return min_segment_arm_; }

    const ExperimentEffects& experiment(const std::string& id) const;

    /// Global estimate for (experiment, metric); throws on unknown names.
    const EffectEstimate& global(const std::string& experiment_id,
                                 const std::string& metric) const;

    /// Segment cell, or nullptr when the experiment has no such segment.
    /// A non-null pointer to a disengaged optional is an insufficient-data
    /// marker.
    const std::optional<EffectEstimate>* find_segment(const std::string& experiment_id,
                                                      const std::string& segment_label,
                                                      const std::string& metric) const;

    /// Global effect for one metric across experiments, in table order.
    std::vector<double> global_taus(const std::string& metric) const;

    bool operator==(const EffectTable&) const = default;

private:
    std::vector<std::string> metric_names_;
    std::vector<ExperimentEffects> experiments_;
    std::size_t min_segment_arm_ = 5;
};

/// Estimates every metric globally and per segment for each experiment.
/// Segments whose treatment or control arm holds fewer than min_segment_arm
/// units get insufficient-data markers instead of estimates. Experiments are
/// processed independently, so `threads` changes the wall time but never the
/// result.
EffectTable build_effect_table(const ExperimentCorpus& corpus, std::size_t min_segment_arm = 5,
                               unsigned threads = 1);

}  // namespace proxima

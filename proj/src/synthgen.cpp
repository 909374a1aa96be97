#include "proxima/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "proxima/parallel.hpp"
#include "proxima/rng.hpp"

namespace proxima {

void SynthConfig::validate() const {
    if (num_experiments == 0 || units_per_arm == 0 || num_segments == 0) {
        throw std::invalid_argument("synth: sizes must be at least 1");
    }
    if (long_effect_sd < 0.0 || proxy_noise_sd < 0.0) {
        throw std::invalid_argument("synth: noise standard deviations must be non-negative");
    }
    auto check_prob = [](double p, const std::string& what) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("synth: " + what + " must lie in [0, 1]");
        }
    };
    check_prob(default_flip_prob, "segment_flip_prob");
    for (const auto& [label, p] : segment_flip_prob) {
        check_prob(p, "segment_flip_prob['" + label + "']");
    }
    if (bernoulli) {
        check_prob(bernoulli_base, "bernoulli_base");
    } else if (!(unit_noise_sd > 0.0)) {
        throw std::invalid_argument("synth: unit_noise_sd must be positive");
    }
}

namespace {

std::string segment_label_for(std::size_t s) { return "q" + std::to_string(s); }

std::string experiment_id_for(std::size_t e, std::size_t total) {
    std::size_t width = std::to_string(total == 0 ? 0 : total - 1).size();
    std::string digits = std::to_string(e);
    std::string id = "e";
    id.append(width > digits.size() ? width - digits.size() : 0, '0');
    id += digits;
    return id;
}

double pearson_or_nan(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

SynthOutput generate(const SynthConfig& config) {
    config.validate();

    const std::size_t E = config.num_experiments;
    const std::size_t S = config.num_segments;
    const std::size_t per_arm = config.units_per_arm;
    const std::size_t per_exp = 2 * per_arm;

    std::vector<std::string> segment_labels;
    std::vector<double> flip_probs;
    for (std::size_t s = 0; s < S; ++s) {
        segment_labels.push_back(segment_label_for(s));
        auto it = config.segment_flip_prob.find(segment_labels.back());
        flip_probs.push_back(it != config.segment_flip_prob.end() ? it->second
                                                                  : config.default_flip_prob);
    }

    // Units within an arm take segments round-robin, so segment s holds
    // count_in_arm(s) units in each arm.
    auto count_in_arm = [&](std::size_t s) {
        return per_arm / S + (s < per_arm % S ? 1 : 0);
    };

    std::vector<Experiment> experiments(E);
    std::vector<ExperimentTruth> truths(E);

    parallel_for(E, config.threads, [&](std::size_t e) {
        Rng rng = Rng::stream(config.seed, static_cast<std::uint64_t>(e));

        ExperimentTruth truth;
        truth.experiment_id = experiment_id_for(e, E);
        truth.long_effect = rng.normal(config.long_effect_mean, config.long_effect_sd);
        truth.segments.resize(S);
        for (std::size_t s = 0; s < S; ++s) {
            double effect = config.proxy_gain * truth.long_effect +
                            rng.normal(0.0, config.proxy_noise_sd);
            if (rng.bernoulli(flip_probs[s])) effect = -effect;
            truth.segments[s].proxy_effect = effect;
            truth.segments[s].planted_flip =
                (effect > 0.0) - (effect < 0.0) !=
                (truth.long_effect > 0.0) - (truth.long_effect < 0.0);
        }

        Experiment exp;
        exp.id = truth.experiment_id;
        exp.columns.assign(2, {});
        exp.unit_ordinals.reserve(per_exp);
        exp.treatment.reserve(per_exp);
        exp.segment_idx.reserve(per_exp);
        const std::uint64_t base_ordinal = static_cast<std::uint64_t>(e) * per_exp;

        auto emit_unit = [&](int arm, std::size_t i) {
            const std::size_t s = i % S;
            exp.unit_ordinals.push_back(base_ordinal + exp.unit_ordinals.size());
            exp.treatment.push_back(static_cast<std::uint8_t>(arm));
            exp.segment_idx.push_back(static_cast<std::uint32_t>(s));

            const double proxy_lift = arm ? truth.segments[s].proxy_effect : 0.0;
            const double long_lift = arm ? truth.long_effect : 0.0;
            if (config.bernoulli) {
                const double p_proxy = std::clamp(config.bernoulli_base + proxy_lift, 0.0, 1.0);
                const double p_long = std::clamp(config.bernoulli_base + long_lift, 0.0, 1.0);
                exp.columns[0].push_back(rng.bernoulli(p_proxy) ? 1.0 : 0.0);
                exp.columns[1].push_back(rng.bernoulli(p_long) ? 1.0 : 0.0);
            } else {
                exp.columns[0].push_back(proxy_lift + rng.normal(0.0, config.unit_noise_sd));
                exp.columns[1].push_back(long_lift + rng.normal(0.0, config.unit_noise_sd));
            }
        };
        for (std::size_t i = 0; i < per_arm; ++i) emit_unit(1, i);
        for (std::size_t i = 0; i < per_arm; ++i) emit_unit(0, i);

        experiments[e] = std::move(exp);
        truths[e] = std::move(truth);
    });

    GroundTruth truth;
    truth.segment_labels = segment_labels;
    truth.experiments = std::move(truths);

    // Implied components from the plant: the true global proxy ATE is the
    // unit-weighted mean of the segment effects.
    std::vector<double> true_proxy(E), true_long(E);
    std::size_t agree = 0, flips = 0;
    for (std::size_t e = 0; e < E; ++e) {
        double weighted = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            weighted += static_cast<double>(count_in_arm(s)) *
                        truth.experiments[e].segments[s].proxy_effect;
            flips += truth.experiments[e].segments[s].planted_flip;
        }
        true_proxy[e] = weighted / static_cast<double>(per_arm);
        true_long[e] = truth.experiments[e].long_effect;
        const int sp = (true_proxy[e] > 0.0) - (true_proxy[e] < 0.0);
        const int sl = (true_long[e] > 0.0) - (true_long[e] < 0.0);
        agree += sp == sl;
    }
    truth.implied_rho = pearson_or_nan(true_proxy, true_long);
    truth.implied_da = static_cast<double>(agree) / static_cast<double>(E);
    truth.implied_fr = static_cast<double>(flips) / static_cast<double>(E * S);

    MetricSchema schema;
    schema.proxy_names = {"proxy"};
    schema.long_term_name = "long_term";

    SynthOutput out;
    out.corpus = ExperimentCorpus::from_columns(schema, {}, segment_labels,
                                                std::move(experiments));
    out.truth = std::move(truth);
    return out;
}

}  // namespace proxima

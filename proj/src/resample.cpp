#include "proxima/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "proxima/parallel.hpp"
#include "proxima/rng.hpp"

namespace proxima {

void BootstrapConfig::validate() const {
    if (num_resamples == 0) {
        throw std::invalid_argument("bootstrap: num_resamples must be positive");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("bootstrap: alpha must lie strictly between 0 and 1");
    }
}

namespace {

/// Everything a resample needs from one experiment, precomputed once.
struct ExperimentStats {
    double tau_proxy = 0.0;
    double tau_long = 0.0;
    std::uint64_t flips = 0;    // countable segment cells that flipped
    std::uint64_t counted = 0;  // countable segment cells
};

double nearest_rank(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    double rank = std::ceil(p * static_cast<double>(n));
    if (rank < 1.0) rank = 1.0;
    std::size_t idx = static_cast<std::size_t>(rank) - 1;
    if (idx >= n) idx = n - 1;
    return sorted[idx];
}

}  // namespace

BootstrapResult bootstrap_ci(const EffectTable& table, const std::string& proxy,
                             const std::string& long_term, const Weights& weights,
                             const BootstrapConfig& config) {
    config.validate();
    weights.validate();
    const std::size_t num_experiments = table.num_experiments();
    if (num_experiments < 2) {
        throw std::invalid_argument("bootstrap: need at least two experiments");
    }

    const std::size_t proxy_idx = table.metric_index(proxy);
    const std::size_t long_idx = table.metric_index(long_term);

    std::vector<ExperimentStats> stats(num_experiments);
    for (std::size_t e = 0; e < num_experiments; ++e) {
        const auto& exp = table.experiments()[e];
        ExperimentStats s;
        s.tau_proxy = exp.global[proxy_idx].tau;
        s.tau_long = exp.global[long_idx].tau;
        const int global_sign = sign_of(s.tau_long);
        for (const auto& seg : exp.segments) {
            const auto& cell = seg.by_metric[proxy_idx];
            if (!cell) continue;
            ++s.counted;
            s.flips += sign_of(cell->tau) != global_sign;
        }
        stats[e] = s;
    }

    BootstrapResult result;
    result.resample_values.assign(config.num_resamples, 0.0);
    std::vector<std::uint8_t> degenerate(config.num_resamples, 0);

    parallel_for(config.num_resamples, config.threads, [&](std::size_t b) {
        Rng rng = Rng::stream(config.seed, static_cast<std::uint64_t>(b));

        double sum_p = 0.0, sum_l = 0.0;
        std::vector<std::size_t> draw(num_experiments);
        for (std::size_t i = 0; i < num_experiments; ++i) {
            const std::size_t e = static_cast<std::size_t>(
                rng.below(static_cast<std::uint64_t>(num_experiments)));
            draw[i] = e;
            sum_p += stats[e].tau_proxy;
            sum_l += stats[e].tau_long;
        }
        const double n = static_cast<double>(num_experiments);
        const double mean_p = sum_p / n;
        const double mean_l = sum_l / n;

        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        std::size_t agree = 0;
        std::uint64_t flips = 0, counted = 0;
        for (std::size_t e : draw) {
            const ExperimentStats& s = stats[e];
            const double dx = s.tau_proxy - mean_p;
            const double dy = s.tau_long - mean_l;
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
            agree += sign_of(s.tau_proxy) == sign_of(s.tau_long);
            flips += s.flips;
            counted += s.counted;
        }

        ComponentScores scores;
        if (sxx <= 0.0 || syy <= 0.0) {
            scores.corr_norm = 0.5;
            degenerate[b] = 1;
        } else {
            scores.corr_norm = (std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0) + 1.0) / 2.0;
        }
        scores.dir_acc = static_cast<double>(agree) / n;
        scores.frag_rate =
            counted == 0 ? 0.0 : static_cast<double>(flips) / static_cast<double>(counted);
        result.resample_values[b] = composite(scores, weights);
    });

    result.degenerate_correlation_count =
        static_cast<std::size_t>(std::accumulate(degenerate.begin(), degenerate.end(), 0UL));

    std::vector<double> sorted = result.resample_values;
    std::sort(sorted.begin(), sorted.end());
    result.ci_low = nearest_rank(sorted, config.alpha / 2.0);
    result.ci_high = nearest_rank(sorted, 1.0 - config.alpha / 2.0);
    return result;
}

}  // namespace proxima

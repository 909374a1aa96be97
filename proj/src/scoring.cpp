#include "proxima/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace proxima {

void Weights::validate() const {
    if (w_corr < 0.0 || w_da < 0.0 || w_fr < 0.0) {
        throw std::invalid_argument("weights: components must be non-negative");
    }
    const double sum = w_corr + w_da + w_fr;
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("weights: components must sum to 1 (got " +
                                    std::to_string(sum) + ")");
    }
}

CorrelationScore normalized_correlation(std::span<const double> proxy_taus,
                                        std::span<const double> long_term_taus) {
    if (proxy_taus.size() != long_term_taus.size()) {
        throw std::invalid_argument("normalized_correlation: series lengths differ");
    }
    if (proxy_taus.size() < 2) {
        throw std::invalid_argument("normalized_correlation: need at least two experiments");
    }

    const std::size_t n = proxy_taus.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += proxy_taus[i];
        my += long_term_taus[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = proxy_taus[i] - mx;
        const double dy = long_term_taus[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }

    CorrelationScore score;
    if (sxx <= 0.0 || syy <= 0.0) {
        score.corr_norm = 0.5;
        return score;
    }
    double rho = sxy / std::sqrt(sxx * syy);
    rho = std::clamp(rho, -1.0, 1.0);
    score.raw_rho = rho;
    score.corr_norm = (rho + 1.0) / 2.0;
    return score;
}

double directional_accuracy(std::span<const double> proxy_taus,
                            std::span<const double> long_term_taus) {
    if (proxy_taus.size() != long_term_taus.size()) {
        throw std::invalid_argument("directional_accuracy: series lengths differ");
    }
    if (proxy_taus.empty()) {
        throw std::invalid_argument("directional_accuracy: empty series");
    }
    std::size_t agree = 0;
    for (std::size_t i = 0; i < proxy_taus.size(); ++i) {
        agree += sign_of(proxy_taus[i]) == sign_of(long_term_taus[i]);
    }
    return static_cast<double>(agree) / static_cast<double>(proxy_taus.size());
}

FragilityRate fragility_rate(const EffectTable& table, const std::string& proxy,
                             const std::string& long_term) {
    const std::size_t proxy_idx = table.metric_index(proxy);
    const std::size_t long_idx = table.metric_index(long_term);

    FragilityRate result;
    for (const auto& exp : table.experiments()) {
        const int global_sign = sign_of(exp.global[long_idx].tau);
        for (const auto& seg : exp.segments) {
            const auto& cell = seg.by_metric[proxy_idx];
            if (!cell) continue;  // insufficient data: out of numerator and denominator
            ++result.num_segments_counted;
            result.num_flips += sign_of(cell->tau) != global_sign;
        }
    }
    if (result.num_segments_counted > 0) {
        result.rate = static_cast<double>(result.num_flips) /
                      static_cast<double>(result.num_segments_counted);
    }
    return result;
}

double composite(const ComponentScores& scores, const Weights& weights) {
    weights.validate();
    return weights.w_corr * scores.corr_norm + weights.w_da * scores.dir_acc +
           weights.w_fr * (1.0 - scores.frag_rate);
}

std::vector<ReliabilityReport> score_all(const EffectTable& table, const MetricSchema& schema,
                                         const Weights& weights) {
    weights.validate();
    schema.validate();
    if (table.num_experiments() < 2) {
        throw std::invalid_argument(
            "score_all: correlation needs at least two experiments (got " +
            std::to_string(table.num_experiments()) + ")");
    }

    const std::vector<double> long_taus = table.global_taus(schema.long_term_name);

    std::vector<ReliabilityReport> reports;
    reports.reserve(schema.proxy_names.size());
    for (const auto& proxy : schema.proxy_names) {
        ReliabilityReport report;
        report.proxy = proxy;

        const std::vector<double> proxy_taus = table.global_taus(proxy);
        const CorrelationScore corr = normalized_correlation(proxy_taus, long_taus);
        const FragilityRate frag = fragility_rate(table, proxy, schema.long_term_name);

        report.components.corr_norm = corr.corr_norm;
        report.components.raw_rho = corr.raw_rho;
        report.components.dir_acc = directional_accuracy(proxy_taus, long_taus);
        report.components.frag_rate = frag.rate;
        report.components.num_experiments = table.num_experiments();
        report.components.num_segments_counted = frag.num_segments_counted;
        report.components.num_flips = frag.num_flips;
        report.reliability = composite(report.components, weights);

        if (!corr.raw_rho) {
            report.warnings.push_back(
                "correlation undefined (constant effect series); scored 0.5");
        }
        if (frag.num_segments_counted == 0) {
            report.warnings.push_back("no segment had enough units in both arms; "
                                      "fragility scored 0");
        }
        reports.push_back(std::move(report));
    }
    return reports;
}

}  // namespace proxima

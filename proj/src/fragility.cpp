#include "proxima/fragility.hpp"

#include <algorithm>

namespace proxima {

std::set<std::string> detect_fragile(const EffectTable& table, const std::string& experiment_id,
                                     const std::string& proxy, const std::string& long_term) {
    const std::size_t proxy_idx = table.metric_index(proxy);
    const std::size_t long_idx = table.metric_index(long_term);
    const ExperimentEffects& exp = table.experiment(experiment_id);
    const int global_sign = sign_of(exp.global[long_idx].tau);

    std::set<std::string> fragile;
    for (const auto& seg : exp.segments) {
        const auto& cell = seg.by_metric[proxy_idx];
        if (cell && sign_of(cell->tau) != global_sign) fragile.insert(seg.label);
    }
    return fragile;
}

FragilityProfile fragility_profile(const EffectTable& table, const std::string& proxy,
                                   const std::string& long_term) {
    const std::size_t proxy_idx = table.metric_index(proxy);
    const std::size_t long_idx = table.metric_index(long_term);

    FragilityProfile profile;
    profile.proxy = proxy;
    for (const auto& exp : table.experiments()) {
        const int global_sign = sign_of(exp.global[long_idx].tau);
        auto& fragile_here = profile.per_experiment[exp.experiment_id];
        for (const auto& seg : exp.segments) {
            const auto& cell = seg.by_metric[proxy_idx];
            if (!cell) continue;
            auto& stats = profile.per_segment[seg.label];
            ++stats.evaluated_count;
            if (sign_of(cell->tau) != global_sign) {
                ++stats.fragile_count;
                fragile_here.insert(seg.label);
            }
        }
    }
    return profile;
}

std::vector<std::pair<std::string, SegmentFragility>> FragilityProfile::ranked_segments() const {
    std::vector<std::pair<std::string, SegmentFragility>> ranked(per_segment.begin(),
                                                                 per_segment.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second.fragile_fraction() != b.second.fragile_fraction()) {
            return a.second.fragile_fraction() > b.second.fragile_fraction();
        }
        return a.first < b.first;
    });
    return ranked;
}

}  // namespace proxima

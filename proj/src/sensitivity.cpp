#include "proxima/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace proxima {

namespace {

bool same_config(const Weights& a, const Weights& b) {
    return std::fabs(a.w_corr - b.w_corr) < 1e-12 && std::fabs(a.w_da - b.w_da) < 1e-12 &&
           std::fabs(a.w_fr - b.w_fr) < 1e-12;
}

/// Rows of one config, in input (schema) order. The sweep emits configs as
/// contiguous runs, so grouping is a linear scan.
std::vector<std::vector<const SweepRow*>> group_by_config(const std::vector<SweepRow>& sweep) {
    std::vector<std::vector<const SweepRow*>> groups;
    for (const auto& row : sweep) {
        if (groups.empty() || !same_config(groups.back().back()->weights, row.weights)) {
            groups.emplace_back();
        }
        groups.back().push_back(&row);
    }
    return groups;
}

}  // namespace

void WeightGrid::validate() const {
    if (configs.empty()) throw std::invalid_argument("weight grid: no configurations");
    for (std::size_t i = 0; i < configs.size(); ++i) {
        configs[i].validate();
        for (std::size_t j = 0; j < i; ++j) {
            if (same_config(configs[i], configs[j])) {
                throw std::invalid_argument("weight grid: duplicate configuration at index " +
                                            std::to_string(i));
            }
        }
    }
}

WeightGrid WeightGrid::default_grid() {
    WeightGrid grid;
    grid.configs = {
        {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {0.5, 0.5, 0.0},
        {0.6, 0.2, 0.2}, {0.4, 0.4, 0.2}, {0.3, 0.3, 0.4}, {0.2, 0.6, 0.2},
        {0.2, 0.2, 0.6}, {0.8, 0.1, 0.1},
    };
    return grid;
}

std::vector<SweepRow> weight_sweep(const std::vector<NamedComponents>& components,
                                   const WeightGrid& grid) {
    if (components.empty()) throw std::invalid_argument("weight_sweep: no component scores");
    grid.validate();

    std::vector<SweepRow> rows;
    rows.reserve(components.size() * grid.configs.size());
    for (const auto& weights : grid.configs) {
        for (const auto& entry : components) {
            rows.push_back({entry.proxy, weights, composite(entry.components, weights)});
        }
    }
    return rows;
}

RankingStability ranking_stability(const std::vector<SweepRow>& sweep) {
    const auto groups = group_by_config(sweep);
    if (groups.empty() || groups.front().size() < 2) {
        throw std::invalid_argument("ranking_stability: need at least two proxies");
    }

    RankingStability result;
    for (const auto& group : groups) {
        const SweepRow* best = group.front();
        const SweepRow* worst = group.front();
        for (const SweepRow* row : group) {
            if (row->reliability > best->reliability) best = row;    // strict: ties keep earlier
            if (row->reliability < worst->reliability) worst = row;
        }
        result.best_per_config.push_back(best->proxy);
        result.worst_per_config.push_back(worst->proxy);
    }
    result.stable =
        std::all_of(result.best_per_config.begin(), result.best_per_config.end(),
                    [&](const std::string& p) { return p == result.best_per_config.front(); }) &&
        std::all_of(result.worst_per_config.begin(), result.worst_per_config.end(),
                    [&](const std::string& p) { return p == result.worst_per_config.front(); });
    return result;
}

std::vector<std::pair<Weights, double>> score_spread(const std::vector<SweepRow>& sweep) {
    const auto groups = group_by_config(sweep);
    if (groups.empty() || groups.front().size() < 2) {
        throw std::invalid_argument("score_spread: need at least two proxies");
    }

    std::vector<std::pair<Weights, double>> spreads;
    spreads.reserve(groups.size());
    for (const auto& group : groups) {
        double lo = group.front()->reliability;
        double hi = lo;
        for (const SweepRow* row : group) {
            lo = std::min(lo, row->reliability);
            hi = std::max(hi, row->reliability);
        }
        spreads.emplace_back(group.front()->weights, hi - lo);
    }
    return spreads;
}

}  // namespace proxima

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "proxima/scoring.hpp"

namespace proxima {

/// Weight configurations to sweep. Entries must each be valid and mutually
/// distinct.
struct WeightGrid {
    std::vector<Weights> configs;

    void validate() const;

    /// Ten distinct configurations: the three degenerate corners, the
    /// correlation/agreement split, the default, and five mixed settings.
    static WeightGrid default_grid();
};

/// Component scores for one proxy, keyed by name. Order carries the
/// schema's proxy order, which also breaks ranking ties.
struct NamedComponents {
    std::string proxy;
    ComponentScores components;
};

struct SweepRow {
    std::string proxy;
    Weights weights;
    double reliability = 0.0;
};

/// Recomputed composite for every (config, proxy) pair; the component
/// scores are weight-independent and are not recomputed. Rows are produced
/// config-major, proxies in input order within each config.
std::vector<SweepRow> weight_sweep(const std::vector<NamedComponents>& components,
                                   const WeightGrid& grid);

struct RankingStability {
    bool stable = false;  // same best and worst proxy under every config
    std::vector<std::string> best_per_config;
    std::vector<std::string> worst_per_config;
};

/// Argmax/argmin proxy per config; ties keep the earlier proxy (schema
/// order). Requires at least two proxies.
RankingStability ranking_stability(const std::vector<SweepRow>& sweep);

/// Per-config gap between the best and worst proxy, in config order.
std::vector<std::pair<Weights, double>> score_spread(const std::vector<SweepRow>& sweep);

}  // namespace proxima

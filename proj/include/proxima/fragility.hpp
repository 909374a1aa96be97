#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "proxima/effects.hpp"

namespace proxima {

/// How often a segment label flipped against the global long-term sign,
/// over the experiments where it could be evaluated.
struct SegmentFragility {
    std::size_t fragile_count = 0;
    std::size_t evaluated_count = 0;

    double fragile_fraction() const {
        return evaluated_count == 0
                   ? 0.0
                   : static_cast<double>(fragile_count) / static_cast<double>(evaluated_count);
    }

    bool operator==(const SegmentFragility&) const = default;
};

/// Segment labels in one experiment whose proxy effect sign disagrees with
/// that experiment's global long-term sign. Insufficient-data segments are
/// never reported fragile.
std::set<std::string> detect_fragile(const EffectTable& table, const std::string& experiment_id,
                                     const std::string& proxy, const std::string& long_term);

struct FragilityProfile {
    std::string proxy;
    std::map<std::string, SegmentFragility> per_segment;
    // experiment id -> fragile segment labels (empty sets included)
    std::map<std::string, std::set<std::string>> per_experiment;

    /// Segments ordered by fragile fraction descending, label ascending on
    /// ties: the order reports list them in.
    std::vector<std::pair<std::string, SegmentFragility>> ranked_segments() const;
};

/// Aggregates detect_fragile across every experiment in the table.
FragilityProfile fragility_profile(const EffectTable& table, const std::string& proxy,
                                   const std::string& long_term);

}  // namespace proxima

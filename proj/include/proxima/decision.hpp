#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "proxima/effects.hpp"
#include "proxima/scoring.hpp"

namespace proxima {

/// One experiment under the threshold policy: ship iff the observed global
/// effect is strictly positive.
struct ExperimentDecision {
    std::string experiment_id;
    bool proxy_ship = false;   // policy applied to the proxy effect
    bool oracle_ship = false;  // policy applied to the long-term effect
    double tau_long = 0.0;
    // Long-term value the oracle captured but this decision did not.
    double payoff_gap = 0.0;

    bool operator==(const ExperimentDecision&) const = default;
};

struct DecisionReport {
    std::string proxy;
    double win_rate = 0.0;  // decisions matching the oracle
    double fpr = 0.0;       // ships the oracle rejects, per proxy ship (0 when it never ships)
    double fnr = 0.0;       // holds the oracle ships, per oracle ship (0 when it never ships)
    double regret = 0.0;    // mean payoff gap, always >= 0
    std::size_t ships_proxy = 0;
    std::size_t ships_oracle = 0;
    std::vector<ExperimentDecision> per_experiment;
};

/// Replays every experiment, deciding once with the proxy and once with the
/// long-term metric as an oracle.
DecisionReport simulate(const EffectTable& table, const std::string& proxy,
                        const std::string& long_term);

/// Proxies ranked by raw effect correlation alone, best first — what the
/// composite score is compared against. Undefined correlations rank last;
/// ties keep the input order.
std::vector<std::string> baseline_correlation_only(
    const std::vector<ReliabilityReport>& reports);

/// Expected win rate of picking one of the candidate proxies uniformly at
/// random: the arithmetic mean of their win rates.
double baseline_random(const std::vector<DecisionReport>& reports);

}  // namespace proxima

#include "proxima/decision.hpp"

#include <algorithm>
#include <stdexcept>

namespace proxima {

DecisionReport simulate(const EffectTable& table, const std::string& proxy,
                        const std::string& long_term) {
    const std::size_t proxy_idx = table.metric_index(proxy);
    const std::size_t long_idx = table.metric_index(long_term);
    if (table.num_experiments() == 0) {
        throw std::invalid_argument("simulate: effect table is empty");
    }

    DecisionReport report;
    report.proxy = proxy;

    std::size_t wins = 0, false_pos = 0, false_neg = 0;
    double regret_sum = 0.0;
    for (const auto& exp : table.experiments()) {
        ExperimentDecision d;
        d.experiment_id = exp.experiment_id;
        d.tau_long = exp.global[long_idx].tau;
        d.proxy_ship = exp.global[proxy_idx].tau > 0.0;
        d.oracle_ship = d.tau_long > 0.0;
        // The oracle banks max(tau_long, 0); this decision banks tau_long
        // only when it ships.
        const double oracle_payoff = d.oracle_ship ? d.tau_long : 0.0;
        const double proxy_payoff = d.proxy_ship ? d.tau_long : 0.0;
        d.payoff_gap = oracle_payoff - proxy_payoff;

        wins += d.proxy_ship == d.oracle_ship;
        false_pos += d.proxy_ship && !d.oracle_ship;
        false_neg += !d.proxy_ship && d.oracle_ship;
        report.ships_proxy += d.proxy_ship;
        report.ships_oracle += d.oracle_ship;
        regret_sum += d.payoff_gap;
        report.per_experiment.push_back(std::move(d));
    }

    const std::size_t total = table.num_experiments();
    report.win_rate = static_cast<double>(wins) / static_cast<double>(total);
    report.fpr = report.ships_proxy == 0 ? 0.0
                                         : static_cast<double>(false_pos) /
                                               static_cast<double>(report.ships_proxy);
    report.fnr = report.ships_oracle == 0 ? 0.0
                                          : static_cast<double>(false_neg) /
                                                static_cast<double>(report.ships_oracle);
    report.regret = regret_sum / static_cast<double>(total);
    return report;
}

std::vector<std::string> baseline_correlation_only(
    const std::vector<ReliabilityReport>& reports) {
    std::vector<std::size_t> order(reports.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = reports[a].components.raw_rho;
        const auto& rb = reports[b].components.raw_rho;
        if (ra.has_value() != rb.has_value()) return ra.has_value();  // defined first
        if (!ra) return false;
        return *ra > *rb;
    });
    std::vector<std::string> ranked;
    ranked.reserve(order.size());
    for (std::size_t i : order) ranked.push_back(reports[i].proxy);
    return ranked;
}

double baseline_random(const std::vector<DecisionReport>& reports) {
    if (reports.empty()) {
        throw std::invalid_argument("baseline_random: no decision reports");
    }
    double sum = 0.0;
    for (const auto& r : reports) sum += r.win_rate;
    return sum / static_cast<double>(reports.size());
}

}  // namespace proxima

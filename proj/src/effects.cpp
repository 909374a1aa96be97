#include "proxima/effects.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "proxima/parallel.hpp"

namespace proxima {

namespace {

/// Running mean/variance. The mean is reported as the plain sum divided by
/// the count so it matches a left-to-right sum over the same values exactly;
/// the variance uses Welford's update for numerical stability.
struct Accumulator {
    std::size_t n = 0;
    double sum = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        sum += x;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }

    double mean_value() const { return sum / static_cast<double>(n); }
    double variance() const { return n >= 2 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

EffectEstimate estimate_from(const Accumulator& treat, const Accumulator& ctrl) {
    EffectEstimate est;
    est.n_treat = treat.n;
    est.n_ctrl = ctrl.n;
    est.mean_treat = treat.mean_value();
    est.mean_ctrl = ctrl.mean_value();
    est.var_treat = treat.variance();
    est.var_ctrl = ctrl.variance();
    est.tau = est.mean_treat - est.mean_ctrl;
    if (auto w = welch_t(est)) {
        est.t_stat = w->t;
        est.p_value = w->p;
    }
    est.cohen_d = cohens_d(est);
    return est;
}

}  // namespace

std::optional<WelchStat> welch_t(const EffectEstimate& est) {
    if (est.n_treat < 2 || est.n_ctrl < 2) return std::nullopt;
    const double nt = static_cast<double>(est.n_treat);
    const double nc = static_cast<double>(est.n_ctrl);
    const double vt = est.var_treat / nt;
    const double vc = est.var_ctrl / nc;
    const double se2 = vt + vc;
    if (se2 <= 0.0) return std::nullopt;

    WelchStat stat;
    stat.t = est.tau / std::sqrt(se2);
    const double df = se2 * se2 / (vt * vt / (nt - 1.0) + vc * vc / (nc - 1.0));
    boost::math::students_t dist(df);
    stat.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(stat.t)));
    return stat;
}

std::optional<double> cohens_d(const EffectEstimate& est) {
    const double dof =
        static_cast<double>(est.n_treat - 1) + static_cast<double>(est.n_ctrl - 1);
    if (dof <= 0.0 || est.n_treat == 0 || est.n_ctrl == 0) return std::nullopt;
    const double pooled = (static_cast<double>(est.n_treat - 1) * est.var_treat +
                           static_cast<double>(est.n_ctrl - 1) * est.var_ctrl) /
                          dof;
    if (pooled <= 0.0) return std::nullopt;
    return est.tau / std::sqrt(pooled);
}

EffectEstimate ate(std::span<const double> treat_values, std::span<const double> ctrl_values) {
    if (treat_values.empty() || ctrl_values.empty()) {
        throw std::invalid_argument("ate: both arms need at least one unit");
    }
    Accumulator treat, ctrl;
    for (double v : treat_values) treat.add(v);
    for (double v : ctrl_values) ctrl.add(v);
    return estimate_from(treat, ctrl);
}

EffectTable::EffectTable(std::vector<std::string> metric_names,
                         std::vector<ExperimentEffects> experiments,
                         std::size_t min_segment_arm)
    : metric_names_(std::move(metric_names)),
      experiments_(std::move(experiments)),
      min_segment_arm_(min_segment_arm) {}

std::size_t EffectTable::metric_index(const std::string& name) const {
    auto it = std::find(metric_names_.begin(), metric_names_.end(), name);
    if (it == metric_names_.end()) {
        throw std::invalid_argument("effect table: no metric named '" + name + "'");
    }
    return static_cast<std::size_t>(it - metric_names_.begin());
}

const ExperimentEffects& EffectTable::experiment(const std::string& id) const {
    for (const auto& exp : experiments_) {
        if (exp.experiment_id == id) return exp;
    }
    throw std::invalid_argument("effect table: no experiment named '" + id + "'");
}

const EffectEstimate& EffectTable::global(const std::string& experiment_id,
                                          const std::string& metric) const {
    return experiment(experiment_id).global[metric_index(metric)];
}

const std::optional<EffectEstimate>* EffectTable::find_segment(
    const std::string& experiment_id, const std::string& segment_label,
    const std::string& metric) const {
    const auto& exp = experiment(experiment_id);
    const std::size_t m = metric_index(metric);
    for (const auto& seg : exp.segments) {
        if (seg.label == segment_label) return &seg.by_metric[m];
    }
    return nullptr;
}

std::vector<double> EffectTable::global_taus(const std::string& metric) const {
    const std::size_t m = metric_index(metric);
    std::vector<double> taus;
    taus.reserve(experiments_.size());
    for (const auto& exp : experiments_) taus.push_back(exp.global[m].tau);
    return taus;
}

EffectTable build_effect_table(const ExperimentCorpus& corpus, std::size_t min_segment_arm,
                               unsigned threads) {
    if (min_segment_arm == 0) {
        throw std::invalid_argument("build_effect_table: min_segment_arm must be positive");
    }
    const std::vector<std::string> metrics = corpus.schema().metric_names();
    const std::size_t num_metrics = metrics.size();
    const std::size_t num_labels = corpus.segment_labels().size();

    std::vector<ExperimentEffects> results(corpus.num_experiments());
    parallel_for(corpus.num_experiments(), threads, [&](std::size_t e) {
        const Experiment& exp = corpus.experiment(e);
        const std::size_t n = exp.size();

        // Segments present in this experiment, ordered by label.
        std::vector<std::uint32_t> present;
        {
            std::vector<bool> seen(num_labels, false);
            for (auto s : exp.segment_idx) seen[s] = true;
            for (std::uint32_t s = 0; s < num_labels; ++s) {
                if (seen[s]) present.push_back(s);
            }
            std::sort(present.begin(), present.end(), [&](std::uint32_t a, std::uint32_t b) {
                return corpus.segment_label(a) < corpus.segment_label(b);
            });
        }
        std::vector<std::size_t> slot(num_labels, 0);
        for (std::size_t i = 0; i < present.size(); ++i) slot[present[i]] = i;

        // accums[metric][segment-slot][arm]; the global pair sits per metric.
        std::vector<std::array<Accumulator, 2>> global_acc(num_metrics);
        std::vector<std::vector<std::array<Accumulator, 2>>> segment_acc(
            num_metrics, std::vector<std::array<Accumulator, 2>>(present.size()));
        for (std::size_t m = 0; m < num_metrics; ++m) {
            const auto& column = exp.columns[m];  // schema metrics lead the column list
            for (std::size_t u = 0; u < n; ++u) {
                const double v = column[u];
                const int arm = exp.treatment[u];
                global_acc[m][arm].add(v);
                segment_acc[m][slot[exp.segment_idx[u]]][arm].add(v);
            }
        }

        ExperimentEffects out;
        out.experiment_id = exp.id;
        out.global.reserve(num_metrics);
        for (std::size_t m = 0; m < num_metrics; ++m) {
            out.global.push_back(estimate_from(global_acc[m][1], global_acc[m][0]));
        }
        out.segments.reserve(present.size());
        for (std::size_t i = 0; i < present.size(); ++i) {
            SegmentEffects seg;
            seg.label = corpus.segment_label(present[i]);
            seg.by_metric.reserve(num_metrics);
            for (std::size_t m = 0; m < num_metrics; ++m) {
                const auto& arms = segment_acc[m][i];
                if (arms[1].n < min_segment_arm || arms[0].n < min_segment_arm) {
                    seg.by_metric.emplace_back(std::nullopt);
                } else {
                    seg.by_metric.emplace_back(estimate_from(arms[1], arms[0]));
                }
            }
            out.segments.push_back(std::move(seg));
        }
        results[e] = std::move(out);
    });

    return EffectTable(metrics, std::move(results), min_segment_arm);
}

}  // namespace proxima

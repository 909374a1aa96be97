#include "proxima/report_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace proxima {

using nlohmann::json;

std::string format_double(double value) {
    char buffer[32];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc()) throw std::runtime_error("format_double: value does not fit");
    return std::string(buffer, ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

json parse_json_file(const std::string& path) {
    json parsed = json::parse(read_file(path), nullptr, true, /*ignore_comments=*/false);
    if (!parsed.is_object()) {
        throw std::runtime_error("'" + path + "': expected a JSON object");
    }
    return parsed;
}

/// Warnings travel in one CSV cell; separate them with '; ' so the cell
/// needs no quoting (messages contain no commas by construction).
std::string join_warnings(const std::vector<std::string>& warnings) {
    std::string joined;
    for (const auto& w : warnings) {
        if (!joined.empty()) joined += "; ";
        joined += w;
    }
    return joined;
}

json weights_to_json(const Weights& weights) {
    return json{{"w_corr", weights.w_corr}, {"w_da", weights.w_da}, {"w_fr", weights.w_fr}};
}

json estimate_to_json(const EffectEstimate& est) {
    json cell{{"tau", est.tau},
              {"mean_treat", est.mean_treat},
              {"mean_ctrl", est.mean_ctrl},
              {"var_treat", est.var_treat},
              {"var_ctrl", est.var_ctrl},
              {"n_treat", est.n_treat},
              {"n_ctrl", est.n_ctrl}};
    cell["t"] = est.t_stat ? json(*est.t_stat) : json(nullptr);
    cell["p"] = est.p_value ? json(*est.p_value) : json(nullptr);
    cell["d"] = est.cohen_d ? json(*est.cohen_d) : json(nullptr);
    return cell;
}

void dump_json(const json& value, const std::string& path) {
    auto out = open_out(path);
    out << value.dump(2) << '\n';
}

}  // namespace

std::string file_digest(const std::string& path) {
    const std::string bytes = read_file(path);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buffer[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buffer[i] = digits[hash & 0xF];
        hash >>= 4;
    }
    return std::string(buffer, 16);
}

SchemaConfig load_schema(const std::string& path) {
    const json parsed = parse_json_file(path);
    const std::string ctx = "schema '" + path + "'";

    SchemaConfig config;
    if (!parsed.contains("proxy_metrics") || !parsed["proxy_metrics"].is_array()) {
        throw std::runtime_error(ctx + ": key 'proxy_metrics' must be an array of strings");
    }
    for (const auto& entry : parsed["proxy_metrics"]) {
        if (!entry.is_string()) {
            throw std::runtime_error(ctx + ": key 'proxy_metrics' must contain only strings");
        }
        config.schema.proxy_names.push_back(entry.get<std::string>());
    }
    if (!parsed.contains("long_term_metric") || !parsed["long_term_metric"].is_string()) {
        throw std::runtime_error(ctx + ": key 'long_term_metric' must be a string");
    }
    config.schema.long_term_name = parsed["long_term_metric"].get<std::string>();
    if (parsed.contains("segment_column")) {
        if (!parsed["segment_column"].is_string()) {
            throw std::runtime_error(ctx + ": key 'segment_column' must be a string");
        }
        config.schema.segment_column = parsed["segment_column"].get<std::string>();
    }
    if (parsed.contains("experiment_column") && !parsed["experiment_column"].is_null()) {
        if (!parsed["experiment_column"].is_string()) {
            throw std::runtime_error(ctx + ": key 'experiment_column' must be a string or null");
        }
        config.experiment_column = parsed["experiment_column"].get<std::string>();
    }
    for (const auto& [key, _] : parsed.items()) {
        if (key != "proxy_metrics" && key != "long_term_metric" && key != "segment_column" &&
            key != "experiment_column") {
            throw std::runtime_error(ctx + ": unknown key '" + key + "'");
        }
    }
    config.schema.validate();
    return config;
}

void write_schema_json(const SchemaConfig& config, const std::string& path) {
    json out{{"proxy_metrics", config.schema.proxy_names},
             {"long_term_metric", config.schema.long_term_name},
             {"segment_column", config.schema.segment_column},
             {"experiment_column",
              config.experiment_column ? json(*config.experiment_column) : json(nullptr)}};
    dump_json(out, path);
}

WeightGrid load_weight_grid(const std::string& path) {
    const json parsed = parse_json_file(path);
    const std::string ctx = "weight grid '" + path + "'";
    if (!parsed.contains("configs") || !parsed["configs"].is_array()) {
        throw std::runtime_error(ctx + ": key 'configs' must be an array");
    }
    WeightGrid grid;
    for (const auto& entry : parsed["configs"]) {
        if (!entry.is_array() || entry.size() != 3 || !entry[0].is_number() ||
            !entry[1].is_number() || !entry[2].is_number()) {
            throw std::runtime_error(ctx + ": each config must be [w_corr, w_da, w_fr]");
        }
        grid.configs.push_back(
            {entry[0].get<double>(), entry[1].get<double>(), entry[2].get<double>()});
    }
    grid.validate();
    return grid;
}

SynthConfig load_synth_config(const std::string& path) {
    const json parsed = parse_json_file(path);
    const std::string ctx = "synth config '" + path + "'";

    SynthConfig config;
    auto bad = [&](const std::string& key, const std::string& expected) -> std::runtime_error {
        return std::runtime_error(ctx + ": key '" + key + "' must be " + expected);
    };
    for (const auto& [key, value] : parsed.items()) {
        if (key == "num_experiments" || key == "units_per_arm" || key == "num_segments" ||
            key == "seed") {
            if (!value.is_number_unsigned()) throw bad(key, "a non-negative integer");
            const auto n = value.get<std::uint64_t>();
            if (key == "num_experiments") config.num_experiments = n;
            else if (key == "units_per_arm") config.units_per_arm = n;
            else if (key == "num_segments") config.num_segments = n;
            else config.seed = n;
        } else if (key == "long_effect_mean" || key == "long_effect_sd" ||
                   key == "proxy_gain" || key == "proxy_noise_sd" || key == "unit_noise_sd" ||
                   key == "bernoulli_base") {
            if (!value.is_number()) throw bad(key, "a number");
            const double x = value.get<double>();
            if (key == "long_effect_mean") config.long_effect_mean = x;
            else if (key == "long_effect_sd") config.long_effect_sd = x;
            else if (key == "proxy_gain") config.proxy_gain = x;
            else if (key == "proxy_noise_sd") config.proxy_noise_sd = x;
            else if (key == "unit_noise_sd") config.unit_noise_sd = x;
            else config.bernoulli_base = x;
        } else if (key == "segment_flip_prob") {
            if (value.is_number()) {
                config.default_flip_prob = value.get<double>();
            } else if (value.is_object()) {
                for (const auto& [label, p] : value.items()) {
                    if (!p.is_number()) throw bad(key, "a number or {label: number} object");
                    config.segment_flip_prob[label] = p.get<double>();
                }
            } else {
                throw bad(key, "a number or {label: number} object");
            }
        } else if (key == "bernoulli") {
            if (!value.is_boolean()) throw bad(key, "a boolean");
            config.bernoulli = value.get<bool>();
        } else {
            throw std::runtime_error(ctx + ": unknown key '" + key + "'");
        }
    }
    config.validate();
    return config;
}

void write_effects_csv(const EffectTable& table, const std::string& path) {
    auto out = open_out(path);
    out << "experiment_id,segment,metric,tau,n_treat,n_ctrl,t,p,d\n";
    auto write_row = [&](const std::string& exp, const std::string& segment,
                         const std::string& metric, const std::optional<EffectEstimate>& est) {
        out << exp << ',' << segment << ',' << metric << ',';
        if (est) {
            out << format_double(est->tau) << ',' << est->n_treat << ',' << est->n_ctrl << ','
                << (est->t_stat ? format_double(*est->t_stat) : "") << ','
                << (est->p_value ? format_double(*est->p_value) : "") << ','
                << (est->cohen_d ? format_double(*est->cohen_d) : "");
        } else {
            out << ",,,,,";
        }
        out << '\n';
    };
    for (const auto& exp : table.experiments()) {
        for (std::size_t m = 0; m < table.metric_names().size(); ++m) {
            write_row(exp.experiment_id, "GLOBAL", table.metric_names()[m], exp.global[m]);
        }
        for (const auto& seg : exp.segments) {
            for (std::size_t m = 0; m < table.metric_names().size(); ++m) {
                write_row(exp.experiment_id, seg.label, table.metric_names()[m],
                          seg.by_metric[m]);
            }
        }
    }
}

void write_effects_json(const EffectTable& table, const std::string& path) {
    json out;
    out["metrics"] = table.metric_names();
    out["min_segment_arm"] = table.min_segment_arm();
    out["experiments"] = json::array();
    for (const auto& exp : table.experiments()) {
        json entry{{"experiment_id", exp.experiment_id}};
        for (std::size_t m = 0; m < table.metric_names().size(); ++m) {
            entry["global"][table.metric_names()[m]] = estimate_to_json(exp.global[m]);
        }
        entry["segments"] = json::array();
        for (const auto& seg : exp.segments) {
            json seg_entry{{"segment", seg.label}};
            for (std::size_t m = 0; m < table.metric_names().size(); ++m) {
                seg_entry["effects"][table.metric_names()[m]] =
                    seg.by_metric[m] ? estimate_to_json(*seg.by_metric[m]) : json(nullptr);
            }
            entry["segments"].push_back(std::move(seg_entry));
        }
        out["experiments"].push_back(std::move(entry));
    }
    dump_json(out, path);
}

void write_reliability_csv(const std::vector<ReliabilityReport>& reports,
                           const std::string& path) {
    auto out = open_out(path);
    out << "proxy,R,C,DA,FR,N,ci_low,ci_high,warnings\n";
    for (const auto& r : reports) {
        out << r.proxy << ',' << format_double(r.reliability) << ','
            << format_double(r.components.corr_norm) << ','
            << format_double(r.components.dir_acc) << ','
            << format_double(r.components.frag_rate) << ',' << r.components.num_experiments
            << ',' << (r.ci_low ? format_double(*r.ci_low) : "") << ','
            << (r.ci_high ? format_double(*r.ci_high) : "") << ',' << join_warnings(r.warnings)
            << '\n';
    }
}

void write_reliability_json(const std::vector<ReliabilityReport>& reports,
                            const Weights& weights, const std::string& path) {
    json out;
    out["weights"] = weights_to_json(weights);
    out["proxies"] = json::array();
    for (const auto& r : reports) {
        json entry{{"proxy", r.proxy},
                   {"reliability", r.reliability},
                   {"components",
                    {{"corr_norm", r.components.corr_norm},
                     {"raw_rho", r.components.raw_rho ? json(*r.components.raw_rho)
                                                      : json(nullptr)},
                     {"dir_acc", r.components.dir_acc},
                     {"frag_rate", r.components.frag_rate},
                     {"num_experiments", r.components.num_experiments},
                     {"num_segments_counted", r.components.num_segments_counted},
                     {"num_flips", r.components.num_flips}}},
                   {"warnings", r.warnings}};
        entry["ci"] = (r.ci_low && r.ci_high)
                          ? json{{"low", *r.ci_low}, {"high", *r.ci_high}}
                          : json(nullptr);
        out["proxies"].push_back(std::move(entry));
    }
    dump_json(out, path);
}

void write_fragility_csv(const FragilityProfile& profile, const std::string& path) {
    auto out = open_out(path);
    out << "segment,fragile_count,evaluated_count,fragile_fraction\n";
    for (const auto& [label, stats] : profile.ranked_segments()) {
        out << label << ',' << stats.fragile_count << ',' << stats.evaluated_count << ','
            << format_double(stats.fragile_fraction()) << '\n';
    }
}

void write_fragility_json(const std::vector<FragilityProfile>& profiles,
                          const std::string& path) {
    json out;
    out["proxies"] = json::array();
    for (const auto& profile : profiles) {
        json entry{{"proxy", profile.proxy}};
        entry["segments"] = json::array();
        for (const auto& [label, stats] : profile.ranked_segments()) {
            entry["segments"].push_back({{"segment", label},
                                         {"fragile_count", stats.fragile_count},
                                         {"evaluated_count", stats.evaluated_count},
                                         {"fragile_fraction", stats.fragile_fraction()}});
        }
        entry["experiments"] = json::object();
        for (const auto& [exp_id, labels] : profile.per_experiment) {
            entry["experiments"][exp_id] = labels;
        }
        out["proxies"].push_back(std::move(entry));
    }
    dump_json(out, path);
}

void write_decisions_csv(const std::vector<DecisionReport>& reports, const std::string& path) {
    auto out = open_out(path);
    out << "proxy,win,FPR,FNR,regret,ships\n";
    for (const auto& r : reports) {
        out << r.proxy << ',' << format_double(r.win_rate) << ',' << format_double(r.fpr) << ','
            << format_double(r.fnr) << ',' << format_double(r.regret) << ',' << r.ships_proxy
            << '\n';
    }
}

void write_decision_detail_csv(const std::vector<DecisionReport>& reports,
                               const std::string& path) {
    auto out = open_out(path);
    out << "proxy,experiment_id,proxy_ship,oracle_ship,tau_long,payoff_gap\n";
    for (const auto& r : reports) {
        for (const auto& d : r.per_experiment) {
            out << r.proxy << ',' << d.experiment_id << ',' << (d.proxy_ship ? 1 : 0) << ','
                << (d.oracle_ship ? 1 : 0) << ',' << format_double(d.tau_long) << ','
                << format_double(d.payoff_gap) << '\n';
        }
    }
}

void write_baselines_json(const std::vector<std::string>& composite_ranking,
                          const std::vector<std::string>& correlation_ranking,
                          double random_expected_win_rate, const std::string& path) {
    json out{{"composite_ranking", composite_ranking},
             {"correlation_only_ranking", correlation_ranking},
             {"random_expected_win_rate", random_expected_win_rate}};
    dump_json(out, path);
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    auto out = open_out(path);
    out << "proxy,w_corr,w_da,w_fr,R\n";
    for (const auto& row : rows) {
        out << row.proxy << ',' << format_double(row.weights.w_corr) << ','
            << format_double(row.weights.w_da) << ',' << format_double(row.weights.w_fr) << ','
            << format_double(row.reliability) << '\n';
    }
}

void write_stability_json(const RankingStability& stability,
                          const std::vector<std::pair<Weights, double>>& spreads,
                          const std::string& path) {
    json out{{"stable", stability.stable},
             {"best_per_config", stability.best_per_config},
             {"worst_per_config", stability.worst_per_config}};
    out["spreads"] = json::array();
    for (const auto& [weights, spread] : spreads) {
        json entry = weights_to_json(weights);
        entry["spread"] = spread;
        out["spreads"].push_back(std::move(entry));
    }
    dump_json(out, path);
}

void write_resamples_csv(const std::vector<double>& values, const std::string& path) {
    auto out = open_out(path);
    out << "resample,R\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        out << i << ',' << format_double(values[i]) << '\n';
    }
}

void write_corpus_csv(const ExperimentCorpus& corpus, const std::string& path) {
    auto out = open_out(path);
    out << "experiment_id,unit_id,treatment," << corpus.schema().segment_column;
    for (const auto& name : corpus.column_names()) out << ',' << name;
    out << '\n';
    for (const auto& exp : corpus.experiments()) {
        for (std::size_t u = 0; u < exp.size(); ++u) {
            out << exp.id << ',' << corpus.unit_id(exp.unit_ordinals[u]) << ','
                << int(exp.treatment[u]) << ',' << corpus.segment_label(exp.segment_idx[u]);
            for (const auto& column : exp.columns) out << ',' << format_double(column[u]);
            out << '\n';
        }
    }
}

void write_ground_truth_json(const GroundTruth& truth, const std::string& path) {
    json out{{"segment_labels", truth.segment_labels},
             {"implied_rho", truth.implied_rho},
             {"implied_da", truth.implied_da},
             {"implied_fr", truth.implied_fr}};
    out["experiments"] = json::array();
    for (const auto& exp : truth.experiments) {
        json entry{{"experiment_id", exp.experiment_id}, {"long_effect", exp.long_effect}};
        entry["segments"] = json::array();
        for (std::size_t s = 0; s < exp.segments.size(); ++s) {
            entry["segments"].push_back({{"segment", truth.segment_labels[s]},
                                         {"proxy_effect", exp.segments[s].proxy_effect},
                                         {"planted_flip", exp.segments[s].planted_flip}});
        }
        out["experiments"].push_back(std::move(entry));
    }
    dump_json(out, path);
}

void write_manifest(const std::string& command, std::uint64_t seed, const Weights& weights,
                    const std::optional<BootstrapConfig>& bootstrap, std::size_t partitions,
                    std::size_t min_segment_arm, const std::vector<ManifestInput>& inputs,
                    const std::vector<std::string>& outputs, const std::string& path) {
    json out{{"command", command},
             {"seed", seed},
             {"weights", weights_to_json(weights)},
             {"partitions", partitions},
             {"min_segment_arm", min_segment_arm},
             {"outputs", outputs}};
    out["bootstrap"] = bootstrap ? json{{"num_resamples", bootstrap->num_resamples},
                                        {"alpha", bootstrap->alpha}}
                                 : json(nullptr);
    out["inputs"] = json::array();
    for (const auto& input : inputs) {
        out["inputs"].push_back({{"path", input.path}, {"fnv1a64", input.digest}});
    }
    dump_json(out, path);
}

}  // namespace proxima

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "proxima/corpus.hpp"
#include "proxima/decision.hpp"
#include "proxima/effects.hpp"
#include "proxima/fragility.hpp"
#include "proxima/resample.hpp"
#include "proxima/scoring.hpp"
#include "proxima/sensitivity.hpp"
#include "proxima/synthgen.hpp"

namespace proxima {

/// Shortest decimal text that round-trips the value exactly.
std::string format_double(double value);

/// FNV-1a 64-bit digest of a file's bytes, rendered as 16 hex digits.
/// Throws when the file cannot be read.
std::string file_digest(const std::string& path);

/// Metric schema plus the optional experiment-grouping column, as read from
/// a JSON config with keys proxy_metrics, long_term_metric, segment_column,
/// experiment_column (string or null).
struct SchemaConfig {
    MetricSchema schema;
    std::optional<std::string> experiment_column;
};
SchemaConfig load_schema(const std::string& path);
void write_schema_json(const SchemaConfig& config, const std::string& path);

/// JSON {"configs": [[w_corr, w_da, w_fr], ...]}.
WeightGrid load_weight_grid(const std::string& path);

/// JSON with SynthConfig's fields; segment_flip_prob may be a number or a
/// label -> probability object. Unknown or mistyped keys are errors naming
/// the key.
SynthConfig load_synth_config(const std::string& path);

// CSV layouts, one header row each:
//   effects:     experiment_id,segment,metric,tau,n_treat,n_ctrl,t,p,d
//                ("GLOBAL" for whole-experiment rows; insufficient-data
//                segment cells keep their row with the numbers blank)
//   reliability: proxy,R,C,DA,FR,N,ci_low,ci_high,warnings
//   fragility:   segment,fragile_count,evaluated_count,fragile_fraction
//   decisions:   proxy,win,FPR,FNR,regret,ships
//   detail:      proxy,experiment_id,proxy_ship,oracle_ship,tau_long,payoff_gap
//   sweep:       proxy,w_corr,w_da,w_fr,R
//   resamples:   resample,R
void write_effects_csv(const EffectTable& table, const std::string& path);
void write_effects_json(const EffectTable& table, const std::string& path);
void write_reliability_csv(const std::vector<ReliabilityReport>& reports,
                           const std::string& path);
void write_reliability_json(const std::vector<ReliabilityReport>& reports,
                            const Weights& weights, const std::string& path);
void write_fragility_csv(const FragilityProfile& profile, const std::string& path);
void write_fragility_json(const std::vector<FragilityProfile>& profiles,
                          const std::string& path);
void write_decisions_csv(const std::vector<DecisionReport>& reports, const std::string& path);
void write_decision_detail_csv(const std::vector<DecisionReport>& reports,
                               const std::string& path);
void write_baselines_json(const std::vector<std::string>& composite_ranking,
                          const std::vector<std::string>& correlation_ranking,
                          double random_expected_win_rate, const std::string& path);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);
void write_stability_json(const RankingStability& stability,
                          const std::vector<std::pair<Weights, double>>& spreads,
                          const std::string& path);
void write_resamples_csv(const std::vector<double>& values, const std::string& path);

/// Corpus in the exact shape ingest_csv reads back:
/// experiment_id,unit_id,treatment,segment,<metrics...>,<features...>.
void write_corpus_csv(const ExperimentCorpus& corpus, const std::string& path);
void write_ground_truth_json(const GroundTruth& truth, const std::string& path);

/// Run manifest: command, seed, weights, the digests of every input file,
/// and the report files written. No timestamps — a rerun with the same
/// inputs is byte-identical.
struct ManifestInput {
    std::string path;
    std::string digest;
};
void write_manifest(const std::string& command, std::uint64_t seed, const Weights& weights,
                    const std::optional<BootstrapConfig>& bootstrap, std::size_t partitions,
                    std::size_t min_segment_arm, const std::vector<ManifestInput>& inputs,
                    const std::vector<std::string>& outputs, const std::string& path);

}  // namespace proxima

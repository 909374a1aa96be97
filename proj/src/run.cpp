#include "proxima/run.hpp"

#include <algorithm>
#include <filesystem>
#include <stdexcept>

#include "proxima/corpus.hpp"
#include "proxima/decision.hpp"
#include "proxima/effects.hpp"
#include "proxima/fragility.hpp"
#include "proxima/parallel.hpp"
#include "proxima/report_io.hpp"
#include "proxima/resample.hpp"
#include "proxima/sensitivity.hpp"
#include "proxima/synthgen.hpp"

namespace proxima {

namespace {

namespace fs = std::filesystem;

std::string sanitize_for_filename(const std::string& name) {
    std::string safe = name;
    for (char& c : safe) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_';
        if (!ok) c = '_';
    }
    return safe;
}

std::string out_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

struct PreparedCorpus {
    ExperimentCorpus corpus;
    SchemaConfig schema_config;
    std::vector<std::string> warnings;  // corpus-level (binning) notes
};

/// Shared front half of score and sweep: load schema, ingest, optionally
/// partition a single logged experiment into many, optionally re-segment by
/// quantile-binned features.
PreparedCorpus prepare_corpus(const RunConfig& config) {
    if (config.bin_features.size() != config.bins.size()) {
        throw std::invalid_argument(
            "run: --bin-features and --bins must list the same number of entries");
    }

    PreparedCorpus prepared{ExperimentCorpus{}, load_schema(config.schema_path), {}};

    IngestOptions options;
    options.experiment_column = prepared.schema_config.experiment_column;
    options.feature_columns = config.bin_features;
    if (!config.bin_features.empty()) options.default_segment_label = "all";

    prepared.corpus = ingest_csv(config.input_path, prepared.schema_config.schema, options);
    if (config.partitions > 0) {
        prepared.corpus = partition_corpus(prepared.corpus, config.partitions, config.seed);
    }
    if (!config.bin_features.empty()) {
        SegmentBinning binning =
            bin_segments(prepared.corpus, config.bin_features, config.bins);
        prepared.corpus = std::move(binning.corpus);
        prepared.warnings = std::move(binning.warnings);
    }
    return prepared;
}

std::vector<ManifestInput> manifest_inputs(std::initializer_list<std::string> paths) {
    std::vector<ManifestInput> inputs;
    for (const auto& path : paths) inputs.push_back({path, file_digest(path)});
    return inputs;
}

}  // namespace

void cmd_score(const RunConfig& config) {
    config.weights.validate();
    fs::create_directories(config.out_dir);
    const unsigned threads = resolve_threads(config.threads);

    PreparedCorpus prepared = prepare_corpus(config);
    const MetricSchema& schema = prepared.corpus.schema();

    const EffectTable table =
        build_effect_table(prepared.corpus, config.min_segment_arm, threads);
    std::vector<ReliabilityReport> reports = score_all(table, schema, config.weights);
    for (auto& report : reports) {
        report.warnings.insert(report.warnings.begin(), prepared.warnings.begin(),
                               prepared.warnings.end());
    }

    std::vector<std::string> outputs;
    if (config.bootstrap_resamples > 0) {
        BootstrapConfig boot;
        boot.num_resamples = config.bootstrap_resamples;
        boot.alpha = config.alpha;
        boot.seed = config.seed;
        boot.threads = threads;
        for (auto& report : reports) {
            const BootstrapResult result = bootstrap_ci(table, report.proxy,
                                                        schema.long_term_name, config.weights,
                                                        boot);
            report.ci_low = result.ci_low;
            report.ci_high = result.ci_high;
            if (result.degenerate_correlation_count > 0) {
                report.warnings.push_back(
                    std::to_string(result.degenerate_correlation_count) +
                    " resamples had a constant effect series (correlation fallback 0.5)");
            }
            // Percentile intervals of a skewed statistic can exclude the
            // point estimate; flag rather than clamp.
            if (report.reliability < result.ci_low || report.reliability > result.ci_high) {
                report.warnings.push_back("composite lies outside its bootstrap interval");
            }
            if (config.dump_resamples) {
                const std::string name =
                    "resamples_" + sanitize_for_filename(report.proxy) + ".csv";
                write_resamples_csv(result.resample_values, out_path(config.out_dir, name));
                outputs.push_back(name);
            }
        }
    }

    write_effects_csv(table, out_path(config.out_dir, "effects.csv"));
    write_effects_json(table, out_path(config.out_dir, "effects.json"));
    write_reliability_csv(reports, out_path(config.out_dir, "reliability.csv"));
    write_reliability_json(reports, config.weights,
                           out_path(config.out_dir, "reliability.json"));
    outputs.insert(outputs.end(),
                   {"effects.csv", "effects.json", "reliability.csv", "reliability.json"});

    std::vector<FragilityProfile> profiles;
    for (const auto& proxy : schema.proxy_names) {
        profiles.push_back(fragility_profile(table, proxy, schema.long_term_name));
        const std::string name = "fragility_" + sanitize_for_filename(proxy) + ".csv";
        write_fragility_csv(profiles.back(), out_path(config.out_dir, name));
        outputs.push_back(name);
    }
    write_fragility_json(profiles, out_path(config.out_dir, "fragility.json"));
    outputs.push_back("fragility.json");

    std::vector<DecisionReport> decisions;
    for (const auto& proxy : schema.proxy_names) {
        decisions.push_back(simulate(table, proxy, schema.long_term_name));
    }
    write_decisions_csv(decisions, out_path(config.out_dir, "decisions.csv"));
    write_decision_detail_csv(decisions, out_path(config.out_dir, "decisions_detail.csv"));
    outputs.insert(outputs.end(), {"decisions.csv", "decisions_detail.csv"});

    std::vector<std::string> composite_ranking;
    {
        std::vector<std::size_t> order(reports.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return reports[a].reliability > reports[b].reliability;
        });
        for (std::size_t i : order) composite_ranking.push_back(reports[i].proxy);
    }
    write_baselines_json(composite_ranking, baseline_correlation_only(reports),
                         baseline_random(decisions), out_path(config.out_dir, "baselines.json"));
    outputs.push_back("baselines.json");

    outputs.push_back("manifest.json");
    std::sort(outputs.begin(), outputs.end());
    std::optional<BootstrapConfig> boot_manifest;
    if (config.bootstrap_resamples > 0) {
        boot_manifest = BootstrapConfig{config.bootstrap_resamples, config.alpha, config.seed, 1};
    }
    write_manifest("score", config.seed, config.weights, boot_manifest, config.partitions,
                   config.min_segment_arm,
                   manifest_inputs({config.schema_path, config.input_path}), outputs,
                   out_path(config.out_dir, "manifest.json"));
}

void cmd_sweep(const RunConfig& config) {
    config.weights.validate();
    fs::create_directories(config.out_dir);
    const unsigned threads = resolve_threads(config.threads);

    PreparedCorpus prepared = prepare_corpus(config);
    const MetricSchema& schema = prepared.corpus.schema();

    const EffectTable table =
        build_effect_table(prepared.corpus, config.min_segment_arm, threads);
    const std::vector<ReliabilityReport> reports = score_all(table, schema, config.weights);

    std::vector<NamedComponents> components;
    components.reserve(reports.size());
    for (const auto& report : reports) components.push_back({report.proxy, report.components});

    const WeightGrid grid =
        config.grid_path.empty() ? WeightGrid::default_grid() : load_weight_grid(config.grid_path);
    const std::vector<SweepRow> rows = weight_sweep(components, grid);

    write_sweep_csv(rows, out_path(config.out_dir, "sweep.csv"));
    std::vector<std::string> outputs{"sweep.csv", "manifest.json"};
    if (components.size() >= 2) {
        write_stability_json(ranking_stability(rows), score_spread(rows),
                             out_path(config.out_dir, "stability.json"));
        outputs.push_back("stability.json");
    }

    std::sort(outputs.begin(), outputs.end());
    std::vector<ManifestInput> inputs =
        manifest_inputs({config.schema_path, config.input_path});
    if (!config.grid_path.empty()) {
        inputs.push_back({config.grid_path, file_digest(config.grid_path)});
    }
    write_manifest("sweep", config.seed, config.weights, std::nullopt, config.partitions,
                   config.min_segment_arm, inputs, outputs,
                   out_path(config.out_dir, "manifest.json"));
}

void cmd_synth(const std::string& config_path, const std::string& out_dir,
               std::optional<std::uint64_t> seed_override, unsigned threads) {
    fs::create_directories(out_dir);

    SynthConfig config = load_synth_config(config_path);
    if (seed_override) config.seed = *seed_override;
    config.threads = resolve_threads(threads);

    const SynthOutput output = generate(config);
    write_corpus_csv(output.corpus, out_path(out_dir, "corpus.csv"));
    write_ground_truth_json(output.truth, out_path(out_dir, "ground_truth.json"));

    SchemaConfig schema_config;
    schema_config.schema = output.corpus.schema();
    schema_config.experiment_column = "experiment_id";
    write_schema_json(schema_config, out_path(out_dir, "schema.json"));

    std::vector<std::string> outputs{"corpus.csv", "ground_truth.json", "manifest.json",
                                     "schema.json"};
    write_manifest("synth", config.seed, Weights::defaults(), std::nullopt, 0, 0,
                   manifest_inputs({config_path}), outputs, out_path(out_dir, "manifest.json"));
}

}  // namespace proxima

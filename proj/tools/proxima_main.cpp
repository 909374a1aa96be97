#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "proxima/run.hpp"

namespace {

proxima::Weights parse_weights(const std::vector<double>& values) {
    if (values.size() != 3) {
        throw CLI::ValidationError("--weights", "expected three comma-separated values a,b,c");
    }
    return {values[0], values[1], values[2]};
}

void add_run_options(CLI::App* cmd, proxima::RunConfig& config,
                     std::vector<double>& weight_values) {
    cmd->add_option("--schema", config.schema_path, "Metric schema JSON")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--input", config.input_path, "Corpus CSV")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", config.out_dir, "Output directory for reports")->required();
    cmd->add_option("--weights", weight_values,
                    "Composite weights w_corr,w_da,w_fr (default 0.6,0.2,0.2)")
        ->delimiter(',')
        ->expected(3);
    cmd->add_option("--bootstrap", config.bootstrap_resamples,
                    "Bootstrap resamples for the reliability CI; 0 disables");
    cmd->add_option("--alpha", config.alpha, "Bootstrap CI level: central 1-alpha interval");
    cmd->add_option("--seed", config.seed, "Seed for partitioning and the bootstrap");
    cmd->add_option("--partitions", config.partitions,
                    "Split a single logged experiment into this many");
    cmd->add_option("--min-segment-arm", config.min_segment_arm,
                    "Minimum units per arm for a segment estimate");
    cmd->add_option("--threads", config.threads, "Worker threads; 0 uses all cores");
    cmd->add_option("--bin-features", config.bin_features,
                    "Numeric feature columns to quantile-bin into segments")
        ->delimiter(',');
    cmd->add_option("--bins", config.bins, "Bins per feature, matching --bin-features")
        ->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Proxy-metric reliability auditing for A/B experiment corpora"};
    app.require_subcommand(1);

    proxima::RunConfig score_config;
    std::vector<double> score_weights;
    CLI::App* score = app.add_subcommand(
        "score", "Score proxies: reliability, fragility, decisions, bootstrap CIs");
    add_run_options(score, score_config, score_weights);
    score->add_flag("--dump-resamples", score_config.dump_resamples,
                    "Also write each proxy's bootstrap resample values");

    proxima::RunConfig sweep_config;
    std::vector<double> sweep_weights;
    CLI::App* sweep =
        app.add_subcommand("sweep", "Recompute the composite across a weight grid");
    add_run_options(sweep, sweep_config, sweep_weights);
    sweep->add_option("--grid", sweep_config.grid_path,
                      "Weight grid JSON; omitted -> built-in ten-config grid")
        ->check(CLI::ExistingFile);

    std::string synth_config_path;
    std::string synth_out;
    std::optional<std::uint64_t> synth_seed;
    unsigned synth_threads = 0;
    CLI::App* synth =
        app.add_subcommand("synth", "Generate a synthetic corpus with planted ground truth");
    synth->add_option("--config", synth_config_path, "Generator config JSON")
        ->required()
        ->check(CLI::ExistingFile);
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--seed", synth_seed, "Overrides the config file's seed");
    synth->add_option("--threads", synth_threads, "Worker threads; 0 uses all cores");

    CLI11_PARSE(app, argc, argv);

    try {
        if (score->parsed()) {
            if (!score_weights.empty()) score_config.weights = parse_weights(score_weights);
            proxima::cmd_score(score_config);
        } else if (sweep->parsed()) {
            if (!sweep_weights.empty()) sweep_config.weights = parse_weights(sweep_weights);
            proxima::cmd_sweep(sweep_config);
        } else if (synth->parsed()) {
            proxima::cmd_synth(synth_config_path, synth_out, synth_seed, synth_threads);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

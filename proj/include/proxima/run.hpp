#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "proxima/scoring.hpp"

namespace proxima {

/// Everything a scoring or sweep run needs, straight from the command line.
struct RunConfig {
    std::string schema_path;
    std::string input_path;
    std::string out_dir;

    Weights weights = Weights::defaults();
    std::size_t bootstrap_resamples = 1000;  // 0 disables the bootstrap
    double alpha = 0.05;
    std::uint64_t seed = 42;
    std::size_t partitions = 0;  // 0 keeps the input's experiment grouping
    std::size_t min_segment_arm = 5;
    unsigned threads = 0;  // 0 -> all hardware threads

    // Optional quantile binning: features crossed into segment labels.
    std::vector<std::string> bin_features;
    std::vector<std::size_t> bins;

    std::string grid_path;  // sweep only; empty -> default grid
    bool dump_resamples = false;
};

/// Ingest, score, bootstrap, profile fragility, and simulate decisions;
/// writes the full report set plus a manifest into out_dir. Throws on any
/// failure; no partial manifest is written.
void cmd_score(const RunConfig& config);

/// Ingest and score once, then recompute the composite across the weight
/// grid; writes sweep.csv, stability.json, and a manifest.
void cmd_sweep(const RunConfig& config);

/// Generate a synthetic corpus from a JSON config; writes corpus.csv,
/// ground_truth.json, a matching schema.json, and a manifest. seed_override
/// and threads, when set, replace the config file's values.
void cmd_synth(const std::string& config_path, const std::string& out_dir,
               std::optional<std::uint64_t> seed_override, unsigned threads);

}  // namespace proxima

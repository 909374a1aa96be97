#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace proxima {

/// Binds the abstract roles (candidate proxies, long-term outcome, segment
/// label) to concrete column names of an input file.
struct MetricSchema {
    std::vector<std::string> proxy_names;
    std::string long_term_name;
    std::string segment_column = "segment";

    /// proxy_names non-empty, no duplicates, long-term metric not among them.
    void validate() const;

    /// Proxies in declared order followed by the long-term metric.
    std::vector<std::string> metric_names() const;

    bool operator==(const MetricSchema&) const = default;
};

/// One user's row as seen at the ingestion / construction boundary.
struct UnitRecord {
    std::string unit_id;  // empty -> assigned from the row ordinal
    int treatment = 0;    // 0 = control, 1 = treatment
    std::string segment;
    std::map<std::string, double> metrics;
};

/// Columnar storage for one experiment's units. Column order matches
/// ExperimentCorpus::column_names().
struct Experiment {
    std::string id;
    std::vector<std::uint64_t> unit_ordinals;
    std::vector<std::uint8_t> treatment;
    std::vector<std::uint32_t> segment_idx;
    std::vector<std::vector<double>> columns;

    std::size_t size() const { return treatment.size(); }
    std::size_t treated_count() const;
    std::size_t control_count() const;

    bool operator==(const Experiment&) const = default;
};

/// Immutable collection of experiments sharing one schema.
///
/// Units are stored column-wise; segment labels are interned corpus-wide.
/// Every experiment is guaranteed to hold at least one treated and one
/// control unit. Construction validates all invariants; afterwards the
/// corpus is read-only and safe to share across threads.
class ExperimentCorpus {
public:
    /// Empty placeholder; only the factories below produce usable corpora.
    ExperimentCorpus() = default;

    /// Build from row-wise records grouped by experiment id. Metric maps
    /// must contain every schema metric; extra keys (consistent across all
    /// units) become auxiliary feature columns usable by bin_segments.
    static ExperimentCorpus from_experiments(
        MetricSchema schema,
        std::vector<std::pair<std::string, std::vector<UnitRecord>>> experiments);

    /// Columnar fast path. `columns` of each experiment must align with
    /// schema metric order followed by `feature_names`.
    static ExperimentCorpus from_columns(MetricSchema schema,
                                         std::vector<std::string> feature_names,
                                         std::vector<std::string> segment_labels,
                                         std::vector<Experiment> experiments,
                                         std::vector<std::string> unit_labels = {});

    const MetricSchema& schema() const { return schema_; }
    std::size_t num_experiments() const { return experiments_.size(); }
    std::size_t num_units() const;
    const std::vector<Experiment>& experiments() const { return experiments_; }
    const Experiment& experiment(std::size_t idx) const { return experiments_.at(idx); }

    /// Schema metrics (proxies then long-term) followed by feature columns.
    const std::vector<std::string>& column_names() const { return column_names_; }
    std::size_t column_index(const std::string& name) const;

    const std::vector<std::string>& segment_labels() const { return segment_labels_; }
    const std::string& segment_label(std::uint32_t idx) const { return segment_labels_.at(idx); }

    /// Unit id for an ordinal: the explicit label when the input carried
    /// one, otherwise the ordinal rendered as text.
    std::string unit_id(std::uint64_t ordinal) const;
    bool has_unit_labels() const { return !unit_labels_.empty(); }
    const std::vector<std::string>& unit_labels() const { return unit_labels_; }

    bool operator==(const ExperimentCorpus&) const = default;

private:
    MetricSchema schema_;
    std::vector<std::string> column_names_;
    std::vector<std::string> segment_labels_;
    std::vector<Experiment> experiments_;
    std::vector<std::string> unit_labels_;  // indexed by ordinal; empty -> implicit ids
};

struct IngestOptions {
    /// Column that groups rows into experiments; absent -> single experiment.
    std::optional<std::string> experiment_column;
    /// Numeric columns to retain for later segment binning.
    std::vector<std::string> feature_columns;
    /// When set, a missing segment column is tolerated and every unit gets
    /// this label (the caller is expected to bin features afterwards).
    std::optional<std::string> default_segment_label;
};

/// Parse a comma-separated UTF-8 file with a header row into a corpus.
/// Errors (missing columns, non-binary treatment, non-finite metric cells,
/// empty arms) are reported with the offending row number.
ExperimentCorpus ingest_csv(const std::string& path, const MetricSchema& schema,
                            const IngestOptions& options = {});

/// Split a single-experiment corpus into `num_experiments` non-overlapping
/// experiments, stratified by arm: each arm is shuffled with `seed` and
/// dealt as contiguous near-equal slices, so every experiment's per-arm
/// count is within one unit of proportional. Deterministic given the seed.
ExperimentCorpus partition_corpus(const ExperimentCorpus& corpus,
                                  std::size_t num_experiments, std::uint64_t seed);

struct SegmentBinning {
    ExperimentCorpus corpus;
    /// Quantile edges per feature, after collapsing degenerate features.
    std::vector<std::vector<double>> edges;
    std::vector<std::string> warnings;
};

/// Replace segment labels with the cross-product of per-feature quantile
/// bins. Quantiles are computed over the full corpus; a boundary value is
/// assigned to the lower bin. A zero-variance feature collapses to a single
/// bin with a warning instead of failing.
SegmentBinning bin_segments(const ExperimentCorpus& corpus,
                            const std::vector<std::string>& feature_columns,
                            const std::vector<std::size_t>& bins_per_feature);

}  // namespace proxima

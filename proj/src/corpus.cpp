#include "proxima/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "proxima/rng.hpp"

namespace proxima {

namespace {

[[noreturn]] void fail(const std::string& context, const std::string& message) {
    throw std::invalid_argument(context + ": " + message);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return fields;
}

bool parse_double(std::string_view field, double& out) {
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && !field.empty();
}

bool parse_treatment(std::string_view field, int& out) {
    int value = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || field.empty()) return false;
    out = value;
    return true;
}

std::string make_experiment_id(std::size_t index, std::size_t total) {
    std::size_t width = std::to_string(total == 0 ? 0 : total - 1).size();
    std::string digits = std::to_string(index);
    std::string id = "e";
    id.append(width > digits.size() ? width - digits.size() : 0, '0');
    id += digits;
    return id;
}

}  // namespace

void MetricSchema::validate() const {
    if (proxy_names.empty()) fail("schema", "proxy_metrics must be non-empty");
    if (long_term_name.empty()) fail("schema", "long_term_metric must be non-empty");
    std::set<std::string> seen;
    for (const auto& name : proxy_names) {
        if (name.empty()) fail("schema", "proxy metric names must be non-empty");
        if (!seen.insert(name).second) fail("schema", "duplicate proxy metric '" + name + "'");
        if (name == long_term_name) {
            fail("schema", "long_term_metric '" + name + "' also listed as a proxy");
        }
    }
    if (segment_column.empty()) fail("schema", "segment_column must be non-empty");
}

std::vector<std::string> MetricSchema::metric_names() const {
    std::vector<std::string> names = proxy_names;
    names.push_back(long_term_name);
    return names;
}

std::size_t Experiment::treated_count() const {
    std::size_t n = 0;
    for (auto t : treatment) n += (t != 0);
    return n;
}

std::size_t Experiment::control_count() const {
    return treatment.size() - treated_count();
}

std::size_t ExperimentCorpus::num_units() const {
    std::size_t n = 0;
    for (const auto& e : experiments_) n += e.size();
    return n;
}

std::size_t ExperimentCorpus::column_index(const std::string& name) const {
    auto it = std::find(column_names_.begin(), column_names_.end(), name);
    if (it == column_names_.end()) fail("corpus", "no column named '" + name + "'");
    return static_cast<std::size_t>(it - column_names_.begin());
}

std::string ExperimentCorpus::unit_id(std::uint64_t ordinal) const {
    if (ordinal < unit_labels_.size()) return unit_labels_[ordinal];
    return std::to_string(ordinal);
}

ExperimentCorpus ExperimentCorpus::from_columns(MetricSchema schema,
                                                std::vector<std::string> feature_names,
                                                std::vector<std::string> segment_labels,
                                                std::vector<Experiment> experiments,
                                                std::vector<std::string> unit_labels) {
    schema.validate();

    std::vector<std::string> columns = schema.metric_names();
    std::set<std::string> column_set(columns.begin(), columns.end());
    for (const auto& f : feature_names) {
        if (!column_set.insert(f).second) {
            fail("corpus", "feature column '" + f + "' duplicates another column");
        }
        columns.push_back(f);
    }

    {
        std::set<std::string> label_set(segment_labels.begin(), segment_labels.end());
        if (label_set.size() != segment_labels.size()) {
            fail("corpus", "segment label table contains duplicates");
        }
    }

    if (experiments.empty()) fail("corpus", "at least one experiment is required");

    std::unordered_set<std::string> ids;
    std::vector<std::uint64_t> all_ordinals;
    for (const auto& exp : experiments) {
        if (exp.id.empty()) fail("corpus", "empty experiment id");
        if (!ids.insert(exp.id).second) fail("corpus", "duplicate experiment id '" + exp.id + "'");
        const std::size_t n = exp.treatment.size();
        if (n == 0) fail("corpus", "experiment '" + exp.id + "' has no units");
        if (exp.unit_ordinals.size() != n || exp.segment_idx.size() != n) {
            fail("corpus", "experiment '" + exp.id + "' has inconsistent column lengths");
        }
        if (exp.columns.size() != columns.size()) {
            fail("corpus", "experiment '" + exp.id + "' has " + std::to_string(exp.columns.size()) +
                               " value columns, expected " + std::to_string(columns.size()));
        }
        std::size_t treated = 0;
        for (auto t : exp.treatment) {
            if (t > 1) fail("corpus", "experiment '" + exp.id + "' has non-binary treatment");
            treated += t;
        }
        if (treated == 0 || treated == n) {
            fail("corpus", "experiment '" + exp.id + "' has an empty " +
                               (treated == 0 ? std::string("treatment") : std::string("control")) +
                               " arm");
        }
        for (std::size_t c = 0; c < exp.columns.size(); ++c) {
            if (exp.columns[c].size() != n) {
                fail("corpus", "experiment '" + exp.id + "' column '" + columns[c] +
                                   "' has wrong length");
            }
            for (double v : exp.columns[c]) {
                if (!std::isfinite(v)) {
                    fail("corpus", "experiment '" + exp.id + "' column '" + columns[c] +
                                       "' contains a non-finite value");
                }
            }
        }
        for (auto s : exp.segment_idx) {
            if (s >= segment_labels.size()) {
                fail("corpus", "experiment '" + exp.id + "' references an unknown segment index");
            }
        }
        all_ordinals.insert(all_ordinals.end(), exp.unit_ordinals.begin(),
                            exp.unit_ordinals.end());
    }

    std::sort(all_ordinals.begin(), all_ordinals.end());
    if (std::adjacent_find(all_ordinals.begin(), all_ordinals.end()) != all_ordinals.end()) {
        fail("corpus", "unit ordinals are not unique across experiments");
    }
    if (!unit_labels.empty() && !all_ordinals.empty() &&
        all_ordinals.back() >= unit_labels.size()) {
        fail("corpus", "unit label table does not cover all ordinals");
    }

    ExperimentCorpus corpus;
    corpus.schema_ = std::move(schema);
    corpus.column_names_ = std::move(columns);
    corpus.segment_labels_ = std::move(segment_labels);
    corpus.experiments_ = std::move(experiments);
    corpus.unit_labels_ = std::move(unit_labels);
    return corpus;
}

ExperimentCorpus ExperimentCorpus::from_experiments(
    MetricSchema schema,
    std::vector<std::pair<std::string, std::vector<UnitRecord>>> experiments) {
    schema.validate();
    const std::vector<std::string> metrics = schema.metric_names();

    // Extra metric keys (consistent across every record) become feature columns.
    std::vector<std::string> features;
    if (!experiments.empty() && !experiments.front().second.empty()) {
        const auto& first = experiments.front().second.front().metrics;
        std::set<std::string> metric_set(metrics.begin(), metrics.end());
        for (const auto& [key, _] : first) {
            if (!metric_set.count(key)) features.push_back(key);
        }
    }
    std::vector<std::string> columns = metrics;
    columns.insert(columns.end(), features.begin(), features.end());

    std::vector<std::string> segment_labels;
    std::unordered_map<std::string, std::uint32_t> segment_lookup;
    auto intern_segment = [&](const std::string& label) {
        auto [it, inserted] =
            segment_lookup.emplace(label, static_cast<std::uint32_t>(segment_labels.size()));
        if (inserted) segment_labels.push_back(label);
        return it->second;
    };

    std::vector<Experiment> built;
    std::vector<std::string> unit_labels;
    bool labels_used = false;
    bool labels_decided = false;
    std::uint64_t ordinal = 0;

    for (auto& [id, records] : experiments) {
        Experiment exp;
        exp.id = id;
        exp.columns.assign(columns.size(), {});
        for (auto& rec : records) {
            if (rec.treatment != 0 && rec.treatment != 1) {
                fail("corpus", "unit '" + rec.unit_id + "' in experiment '" + id +
                                   "' has non-binary treatment " + std::to_string(rec.treatment));
            }
            const bool has_label = !rec.unit_id.empty();
            if (!labels_decided) {
                labels_used = has_label;
                labels_decided = true;
            } else if (labels_used != has_label) {
                fail("corpus", "unit ids must be given for all units or none");
            }
            if (labels_used) unit_labels.push_back(rec.unit_id);

            exp.unit_ordinals.push_back(ordinal++);
            exp.treatment.push_back(static_cast<std::uint8_t>(rec.treatment));
            exp.segment_idx.push_back(intern_segment(rec.segment));
            for (std::size_t c = 0; c < columns.size(); ++c) {
                auto it = rec.metrics.find(columns[c]);
                if (it == rec.metrics.end()) {
                    fail("corpus", "experiment '" + id + "' unit missing metric '" + columns[c] +
                                       "'");
                }
                exp.columns[c].push_back(it->second);
            }
            if (rec.metrics.size() != columns.size()) {
                fail("corpus", "experiment '" + id + "' unit carries unexpected metric keys");
            }
        }
        built.push_back(std::move(exp));
    }

    if (labels_used) {
        std::set<std::string> unique(unit_labels.begin(), unit_labels.end());
        if (unique.size() != unit_labels.size()) fail("corpus", "duplicate unit ids");
    }

    return from_columns(std::move(schema), std::move(features), std::move(segment_labels),
                        std::move(built), std::move(unit_labels));
}

ExperimentCorpus ingest_csv(const std::string& path, const MetricSchema& schema,
                            const IngestOptions& options) {
    schema.validate();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("ingest: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("ingest: '" + path + "' is empty");
    if (line.size() >= 3 && line[0] == '\xEF' && line[1] == '\xBB' && line[2] == '\xBF') {
        line.erase(0, 3);  // UTF-8 BOM
    }

    std::vector<std::string> header;
    for (auto f : split_fields(line)) header.emplace_back(f);
    std::unordered_map<std::string, std::size_t> col_of;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!col_of.emplace(header[i], i).second) {
            throw std::runtime_error("ingest: duplicate header column '" + header[i] + "'");
        }
    }
    auto require_column = [&](const std::string& name) {
        auto it = col_of.find(name);
        if (it == col_of.end()) {
            throw std::runtime_error("ingest: missing column '" + name + "' in '" + path + "'");
        }
        return it->second;
    };

    const std::size_t treatment_col = require_column("treatment");
    std::optional<std::size_t> segment_col;
    if (col_of.count(schema.segment_column)) {
        segment_col = col_of[schema.segment_column];
    } else if (!options.default_segment_label) {
        require_column(schema.segment_column);
    }
    std::optional<std::size_t> experiment_col;
    if (options.experiment_column) experiment_col = require_column(*options.experiment_column);
    std::optional<std::size_t> unit_col;
    if (col_of.count("unit_id")) unit_col = col_of["unit_id"];

    // Value columns: schema metrics first, then retained features (deduped).
    std::vector<std::string> metrics = schema.metric_names();
    std::vector<std::string> features;
    {
        std::set<std::string> seen(metrics.begin(), metrics.end());
        for (const auto& f : options.feature_columns) {
            if (seen.insert(f).second) features.push_back(f);
        }
    }
    std::vector<std::size_t> value_cols;
    std::vector<std::string> value_names = metrics;
    value_names.insert(value_names.end(), features.begin(), features.end());
    for (const auto& name : value_names) value_cols.push_back(require_column(name));

    std::vector<Experiment> experiments;
    std::unordered_map<std::string, std::size_t> experiment_lookup;
    auto experiment_slot = [&](const std::string& id) -> Experiment& {
        auto [it, inserted] = experiment_lookup.emplace(id, experiments.size());
        if (inserted) {
            Experiment exp;
            exp.id = id;
            exp.columns.assign(value_names.size(), {});
            experiments.push_back(std::move(exp));
        }
        return experiments[it->second];
    };

    std::vector<std::string> segment_labels;
    std::unordered_map<std::string, std::uint32_t> segment_lookup;
    auto intern_segment = [&](std::string_view label) {
        auto it = segment_lookup.find(std::string(label));
        if (it != segment_lookup.end()) return it->second;
        auto idx = static_cast<std::uint32_t>(segment_labels.size());
        segment_labels.emplace_back(label);
        segment_lookup.emplace(segment_labels.back(), idx);
        return idx;
    };

    std::vector<std::string> unit_labels;
    std::uint64_t row = 0;  // 1-based data row, header excluded
    while (std::getline(in, line)) {
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        ++row;
        const std::string row_ctx = "ingest: row " + std::to_string(row);
        auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw std::runtime_error(row_ctx + ": expected " + std::to_string(header.size()) +
                                     " fields, found " + std::to_string(fields.size()));
        }

        int treatment = 0;
        if (!parse_treatment(fields[treatment_col], treatment) ||
            (treatment != 0 && treatment != 1)) {
            throw std::runtime_error(row_ctx + ": treatment value '" +
                                     std::string(fields[treatment_col]) + "' is not 0 or 1");
        }

        std::string experiment_id = "all";
        if (experiment_col) experiment_id = std::string(fields[*experiment_col]);
        Experiment& exp = experiment_slot(experiment_id);

        exp.unit_ordinals.push_back(row - 1);
        exp.treatment.push_back(static_cast<std::uint8_t>(treatment));

        if (segment_col) {
            auto label = fields[*segment_col];
            if (label.empty()) throw std::runtime_error(row_ctx + ": empty segment value");
            exp.segment_idx.push_back(intern_segment(label));
        } else {
            exp.segment_idx.push_back(intern_segment(*options.default_segment_label));
        }

        for (std::size_t c = 0; c < value_cols.size(); ++c) {
            double value = 0.0;
            auto field = fields[value_cols[c]];
            if (!parse_double(field, value)) {
                throw std::runtime_error(row_ctx + ": column '" + value_names[c] +
                                         "': cannot parse '" + std::string(field) +
                                         "' as a number");
            }
            if (!std::isfinite(value)) {
                throw std::runtime_error(row_ctx + ": column '" + value_names[c] +
                                         "': non-finite value");
            }
            exp.columns[c].push_back(value);
        }

        if (unit_col) unit_labels.emplace_back(fields[*unit_col]);
    }
    if (row == 0) throw std::runtime_error("ingest: '" + path + "' has no data rows");

    for (const auto& exp : experiments) {
        const std::size_t treated = exp.treated_count();
        if (treated == 0 || treated == exp.size()) {
            throw std::runtime_error("ingest: experiment '" + exp.id + "' has an empty " +
                                     (treated == 0 ? std::string("treatment")
                                                   : std::string("control")) +
                                     " arm");
        }
    }

    return ExperimentCorpus::from_columns(schema, features, std::move(segment_labels),
                                          std::move(experiments), std::move(unit_labels));
}

ExperimentCorpus partition_corpus(const ExperimentCorpus& corpus, std::size_t num_experiments,
                                  std::uint64_t seed) {
    if (corpus.num_experiments() != 1) {
        fail("partition", "corpus already holds " + std::to_string(corpus.num_experiments()) +
                              " experiments; expected exactly one");
    }
    if (num_experiments == 0) fail("partition", "num_experiments must be positive");

    const Experiment& source = corpus.experiment(0);
    std::vector<std::size_t> treated, control;
    for (std::size_t u = 0; u < source.size(); ++u) {
        (source.treatment[u] ? treated : control).push_back(u);
    }
    if (num_experiments > std::min(treated.size(), control.size())) {
        fail("partition", "num_experiments " + std::to_string(num_experiments) +
                              " exceeds the smaller arm size " +
                              std::to_string(std::min(treated.size(), control.size())));
    }

    {
        Rng rng = Rng::stream(seed, 0);
        rng.shuffle(treated);
    }
    {
        Rng rng = Rng::stream(seed, 1);
        rng.shuffle(control);
    }

    // Near-equal contiguous slices per arm: the first (size mod k) experiments
    // receive one extra unit, so every per-arm count is within one unit of
    // proportional.
    auto slice_bounds = [&](std::size_t total) {
        std::vector<std::size_t> bounds{0};
        const std::size_t base = total / num_experiments;
        const std::size_t extra = total % num_experiments;
        for (std::size_t i = 0; i < num_experiments; ++i) {
            bounds.push_back(bounds.back() + base + (i < extra ? 1 : 0));
        }
        return bounds;
    };
    const auto treat_bounds = slice_bounds(treated.size());
    const auto ctrl_bounds = slice_bounds(control.size());

    std::vector<Experiment> parts;
    parts.reserve(num_experiments);
    for (std::size_t i = 0; i < num_experiments; ++i) {
        Experiment part;
        part.id = make_experiment_id(i, num_experiments);
        part.columns.assign(source.columns.size(), {});
        auto copy_unit = [&](std::size_t u) {
            part.unit_ordinals.push_back(source.unit_ordinals[u]);
            part.treatment.push_back(source.treatment[u]);
            part.segment_idx.push_back(source.segment_idx[u]);
            for (std::size_t c = 0; c < source.columns.size(); ++c) {
                part.columns[c].push_back(source.columns[c][u]);
            }
        };
        for (std::size_t j = treat_bounds[i]; j < treat_bounds[i + 1]; ++j) copy_unit(treated[j]);
        for (std::size_t j = ctrl_bounds[i]; j < ctrl_bounds[i + 1]; ++j) copy_unit(control[j]);
        parts.push_back(std::move(part));
    }

    std::vector<std::string> features(corpus.column_names().begin() +
                                          static_cast<std::ptrdiff_t>(
                                              corpus.schema().metric_names().size()),
                                      corpus.column_names().end());
    return ExperimentCorpus::from_columns(corpus.schema(), std::move(features),
                                          corpus.segment_labels(), std::move(parts),
                                          corpus.unit_labels());
}

SegmentBinning bin_segments(const ExperimentCorpus& corpus,
                            const std::vector<std::string>& feature_columns,
                            const std::vector<std::size_t>& bins_per_feature) {
    if (feature_columns.empty()) fail("bin_segments", "no feature columns given");
    if (feature_columns.size() != bins_per_feature.size()) {
        fail("bin_segments", "feature_columns and bins_per_feature differ in length");
    }
    std::size_t product = 1;
    for (std::size_t b : bins_per_feature) {
        if (b == 0) fail("bin_segments", "bin counts must be positive");
        product *= b;
    }
    if (product < 2) fail("bin_segments", "product of bins_per_feature must be at least 2");

    std::vector<std::size_t> cols;
    for (const auto& name : feature_columns) cols.push_back(corpus.column_index(name));

    SegmentBinning result;

    // Quantile edges over the full corpus, nearest-rank convention. A value
    // equal to an edge falls in the lower bin.
    std::vector<std::size_t> effective_bins;
    for (std::size_t f = 0; f < cols.size(); ++f) {
        std::vector<double> values;
        for (const auto& exp : corpus.experiments()) {
            const auto& col = exp.columns[cols[f]];
            values.insert(values.end(), col.begin(), col.end());
        }
        std::sort(values.begin(), values.end());

        std::vector<double> edges;
        const std::size_t bins = bins_per_feature[f];
        if (values.front() == values.back()) {
            if (bins > 1) {
                result.warnings.push_back("feature '" + feature_columns[f] +
                                          "' has zero variance; collapsed to one bin");
            }
        } else {
            const std::size_t n = values.size();
            for (std::size_t i = 1; i < bins; ++i) {
                std::size_t rank = (i * n + bins - 1) / bins;  // ceil(i*n/bins)
                edges.push_back(values[rank - 1]);
            }
            if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
                result.warnings.push_back("feature '" + feature_columns[f] +
                                          "': ties leave fewer than " + std::to_string(bins) +
                                          " distinct bins");
            }
        }
        effective_bins.push_back(edges.size() + 1);
        result.edges.push_back(std::move(edges));
    }

    // Full cross-product label table in odometer order, first feature major.
    std::vector<std::string> labels;
    std::vector<std::size_t> strides(cols.size(), 1);
    for (std::size_t f = cols.size(); f-- > 1;) {
        strides[f - 1] = strides[f] * effective_bins[f];
    }
    std::size_t total = strides[0] * effective_bins[0];
    for (std::size_t code = 0; code < total; ++code) {
        std::string label;
        std::size_t rest = code;
        for (std::size_t f = 0; f < cols.size(); ++f) {
            if (f) label += '|';
            label += feature_columns[f] + "=b" + std::to_string(rest / strides[f]);
            rest %= strides[f];
        }
        labels.push_back(std::move(label));
    }

    std::vector<Experiment> rebuilt;
    for (const auto& exp : corpus.experiments()) {
        Experiment copy = exp;
        for (std::size_t u = 0; u < exp.size(); ++u) {
            std::size_t code = 0;
            for (std::size_t f = 0; f < cols.size(); ++f) {
                const double v = exp.columns[cols[f]][u];
                const auto& edges = result.edges[f];
                std::size_t bin = static_cast<std::size_t>(
                    std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
                // lower_bound counts edges < v, so v == edge stays low
                code += bin * strides[f];
            }
            copy.segment_idx[u] = static_cast<std::uint32_t>(code);
        }
        rebuilt.push_back(std::move(copy));
    }

    std::vector<std::string> features(corpus.column_names().begin() +
                                          static_cast<std::ptrdiff_t>(
                                              corpus.schema().metric_names().size()),
                                      corpus.column_names().end());
    result.corpus = ExperimentCorpus::from_columns(corpus.schema(), std::move(features),
                                                   std::move(labels), std::move(rebuilt),
                                                   corpus.unit_labels());
    return result;
}

}  // namespace proxima

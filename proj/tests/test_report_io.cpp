#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "proxima/corpus.hpp"
#include "proxima/effects.hpp"
#include "proxima/report_io.hpp"

using namespace proxima;
namespace fs = std::filesystem;

namespace {

/// Temp directory wiped when the test case ends.
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("proxima_io_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }

    static int& counter() {
        static int n = 0;
        return n;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

MetricSchema schema_one_proxy() {
    MetricSchema schema;
    schema.proxy_names = {"clicks"};
    schema.long_term_name = "retention";
    return schema;
}

UnitRecord unit(int treatment, const std::string& segment, double clicks, double retention) {
    UnitRecord rec;
    rec.treatment = treatment;
    rec.segment = segment;
    rec.metrics = {{"clicks", clicks}, {"retention", retention}};
    return rec;
}

}  // namespace

TEST_SUITE("report_io") {
    TEST_CASE("format_double is shortest and round-trips") {
        CHECK(format_double(0.5) == "0.5");
        CHECK(format_double(1.0) == "1");
        CHECK(format_double(-3.25) == "-3.25");
        CHECK(format_double(0.1) == "0.1");
        CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
        CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
    }

    TEST_CASE("file digest matches the reference fold") {
        TempDir dir;
        // FNV-1a 64 of "abc".
        spit(dir.file("abc.txt"), "abc");
        CHECK(file_digest(dir.file("abc.txt")) == "e71fa2190541574b");
        // Offset basis: digest of the empty file.
        spit(dir.file("empty.txt"), "");
        CHECK(file_digest(dir.file("empty.txt")) == "cbf29ce484222325");
        CHECK_THROWS(file_digest(dir.file("missing.txt")));
    }

    TEST_CASE("schema config round-trips through JSON") {
        TempDir dir;
        SchemaConfig config;
        config.schema.proxy_names = {"clicks", "views"};
        config.schema.long_term_name = "retention";
        config.schema.segment_column = "country";
        config.experiment_column = "exp";
        write_schema_json(config, dir.file("schema.json"));

        const SchemaConfig loaded = load_schema(dir.file("schema.json"));
        CHECK(loaded.schema.proxy_names == config.schema.proxy_names);
        CHECK(loaded.schema.long_term_name == config.schema.long_term_name);
        CHECK(loaded.schema.segment_column == config.schema.segment_column);
        CHECK(loaded.experiment_column == config.experiment_column);

        config.experiment_column.reset();
        write_schema_json(config, dir.file("schema2.json"));
        CHECK_FALSE(load_schema(dir.file("schema2.json")).experiment_column.has_value());
    }

    TEST_CASE("schema errors name the offending key") {
        TempDir dir;
        spit(dir.file("bad1.json"),
             R"({"proxy_metrics": ["a"], "long_term_metric": "b", "segment_column": "s", "experiment_column": null, "extra": 1})");
        CHECK_THROWS_WITH_AS(static_cast<void>(load_schema(dir.file("bad1.json"))),
                             doctest::Contains("extra"), std::runtime_error);

        spit(dir.file("bad2.json"), R"({"long_term_metric": "b", "segment_column": "s"})");
        CHECK_THROWS_WITH_AS(static_cast<void>(load_schema(dir.file("bad2.json"))),
                             doctest::Contains("proxy_metrics"), std::runtime_error);

        spit(dir.file("bad3.json"),
             R"({"proxy_metrics": "a", "long_term_metric": "b", "segment_column": "s"})");
        CHECK_THROWS_WITH_AS(static_cast<void>(load_schema(dir.file("bad3.json"))),
                             doctest::Contains("proxy_metrics"), std::runtime_error);

        spit(dir.file("bad4.json"), "not json at all");
        CHECK_THROWS(static_cast<void>(load_schema(dir.file("bad4.json"))));
    }

    TEST_CASE("weight grids load from JSON") {
        TempDir dir;
        spit(dir.file("grid.json"), R"({"configs": [[1, 0, 0], [0.6, 0.2, 0.2]]})");
        const WeightGrid grid = load_weight_grid(dir.file("grid.json"));
        REQUIRE(grid.configs.size() == 2);
        CHECK(grid.configs[0] == Weights{1, 0, 0});
        CHECK(grid.configs[1] == Weights{0.6, 0.2, 0.2});

        spit(dir.file("short.json"), R"({"configs": [[1, 0]]})");
        CHECK_THROWS(static_cast<void>(load_weight_grid(dir.file("short.json"))));
        spit(dir.file("bad_sum.json"), R"({"configs": [[1, 1, 1]]})");
        CHECK_THROWS(static_cast<void>(load_weight_grid(dir.file("bad_sum.json"))));
        spit(dir.file("dup.json"), R"({"configs": [[1, 0, 0], [1, 0, 0]]})");
        CHECK_THROWS(static_cast<void>(load_weight_grid(dir.file("dup.json"))));
    }

    TEST_CASE("synth config loads scalars, maps, and reports bad keys") {
        TempDir dir;
        spit(dir.file("synth.json"), R"({
            "num_experiments": 4, "units_per_arm": 25, "num_segments": 2,
            "long_effect_mean": 0.8, "long_effect_sd": 0.2,
            "proxy_gain": 1.5, "proxy_noise_sd": 0.1,
            "segment_flip_prob": {"q1": 0.9},
            "unit_noise_sd": 0.7, "bernoulli": false, "seed": 12
        })");
        const SynthConfig config = load_synth_config(dir.file("synth.json"));
        CHECK(config.num_experiments == 4);
        CHECK(config.units_per_arm == 25);
        CHECK(config.proxy_gain == 1.5);
        CHECK(config.segment_flip_prob.at("q1") == 0.9);
        CHECK(config.default_flip_prob == 0.0);  // unmapped labels never flip
        CHECK(config.seed == 12);

        // Scalar flip probability spreads to the default.
        spit(dir.file("scalar.json"), R"({"segment_flip_prob": 0.3})");
        CHECK(load_synth_config(dir.file("scalar.json")).default_flip_prob == 0.3);

        spit(dir.file("unknown.json"), R"({"num_experiment": 4})");
        CHECK_THROWS_WITH_AS(static_cast<void>(load_synth_config(dir.file("unknown.json"))),
                             doctest::Contains("num_experiment"), std::runtime_error);

        spit(dir.file("mistyped.json"), R"({"units_per_arm": "many"})");
        CHECK_THROWS_WITH_AS(static_cast<void>(load_synth_config(dir.file("mistyped.json"))),
                             doctest::Contains("units_per_arm"), std::runtime_error);
    }

    TEST_CASE("effects CSV keeps insufficient cells as blank fields") {
        // "solo" has one unit per arm -> marker at floor 2.
        const auto corpus = ExperimentCorpus::from_experiments(
            schema_one_proxy(),
            {{"e1",
              {unit(1, "big", 4, 3), unit(1, "big", 6, 5), unit(0, "big", 1, 2),
               unit(0, "big", 3, 4), unit(1, "solo", 9, 9), unit(0, "solo", 1, 1)}}});
        const EffectTable table = build_effect_table(corpus, 2);

        TempDir dir;
        write_effects_csv(table, dir.file("effects.csv"));
        const std::string text = slurp(dir.file("effects.csv"));

        std::istringstream lines(text);
        std::string line;
        std::getline(lines, line);
        CHECK(line == "experiment_id,segment,metric,tau,n_treat,n_ctrl,t,p,d");
        bool saw_marker = false, saw_global = false;
        while (std::getline(lines, line)) {
            if (line.rfind("e1,solo,clicks", 0) == 0) {
                saw_marker = true;
                // No estimate exists for the cell, so every numeric field
                // stays blank.
                CHECK(line == "e1,solo,clicks,,,,,,");
            }
            if (line.rfind("e1,GLOBAL,clicks", 0) == 0) {
                saw_global = true;
                // tau = mean(4,6,9) - mean(1,3,1) = 19/3 - 5/3.
                CHECK(line.find(",4.666666666666666,3,3,") != std::string::npos);
            }
        }
        CHECK(saw_marker);
        CHECK(saw_global);
    }

    TEST_CASE("reliability CSV layout") {
        ReliabilityReport report;
        report.proxy = "clicks";
        report.components.corr_norm = 0.71;
        report.components.dir_acc = 1.0;
        report.components.frag_rate = 0.13;
        report.components.num_experiments = 40;
        report.reliability = 0.8;
        report.ci_low = 0.77;
        report.ci_high = 0.83;
        report.warnings = {"first note", "second note"};

        TempDir dir;
        write_reliability_csv({report}, dir.file("reliability.csv"));
        CHECK(slurp(dir.file("reliability.csv")) ==
              "proxy,R,C,DA,FR,N,ci_low,ci_high,warnings\n"
              "clicks,0.8,0.71,1,0.13,40,0.77,0.83,first note; second note\n");

        report.ci_low.reset();
        report.ci_high.reset();
        report.warnings.clear();
        write_reliability_csv({report}, dir.file("no_ci.csv"));
        CHECK(slurp(dir.file("no_ci.csv")) ==
              "proxy,R,C,DA,FR,N,ci_low,ci_high,warnings\n"
              "clicks,0.8,0.71,1,0.13,40,,,\n");
    }

    TEST_CASE("fragility, decisions, sweep, and resamples CSV layouts") {
        TempDir dir;

        FragilityProfile profile;
        profile.proxy = "clicks";
        profile.per_segment["eu"] = {2, 3};
        profile.per_segment["us"] = {0, 3};
        write_fragility_csv(profile, dir.file("fragility.csv"));
        CHECK(slurp(dir.file("fragility.csv")) ==
              "segment,fragile_count,evaluated_count,fragile_fraction\n"
              "eu,2,3,0.6666666666666666\n"
              "us,0,3,0\n");

        DecisionReport decision;
        decision.proxy = "clicks";
        decision.win_rate = 1.0 / 3.0;
        decision.fpr = 0.5;
        decision.fnr = 0.5;
        decision.regret = 4.0 / 3.0;
        decision.ships_proxy = 2;
        decision.per_experiment = {{"e0", true, true, 2.0, 0.0}, {"e1", false, true, 3.0, 3.0}};
        write_decisions_csv({decision}, dir.file("decisions.csv"));
        CHECK(slurp(dir.file("decisions.csv")) ==
              "proxy,win,FPR,FNR,regret,ships\n"
              "clicks,0.3333333333333333,0.5,0.5,1.3333333333333333,2\n");

        write_decision_detail_csv({decision}, dir.file("detail.csv"));
        CHECK(slurp(dir.file("detail.csv")) ==
              "proxy,experiment_id,proxy_ship,oracle_ship,tau_long,payoff_gap\n"
              "clicks,e0,1,1,2,0\n"
              "clicks,e1,0,1,3,3\n");

        const std::vector<SweepRow> rows = {{"clicks", {1, 0, 0}, 0.71}};
        write_sweep_csv(rows, dir.file("sweep.csv"));
        CHECK(slurp(dir.file("sweep.csv")) == "proxy,w_corr,w_da,w_fr,R\nclicks,1,0,0,0.71\n");

        write_resamples_csv({0.5, 0.625}, dir.file("resamples.csv"));
        CHECK(slurp(dir.file("resamples.csv")) == "resample,R\n0,0.5\n1,0.625\n");
    }

    TEST_CASE("corpus CSV round-trips through ingest") {
        const auto corpus = ExperimentCorpus::from_experiments(
            schema_one_proxy(),
            {{"e1", {unit(1, "us", 2.5, 1.5), unit(0, "us", 1.0, 1.0)}},
             {"e2", {unit(1, "eu", 3.5, 2.0), unit(0, "eu", 0.5, 0.25)}}});

        TempDir dir;
        write_corpus_csv(corpus, dir.file("corpus.csv"));
        const std::string text = slurp(dir.file("corpus.csv"));
        CHECK(text.rfind("experiment_id,unit_id,treatment,segment,clicks,retention\n", 0) == 0);

        IngestOptions options;
        options.experiment_column = "experiment_id";
        const auto reread = ingest_csv(dir.file("corpus.csv"), schema_one_proxy(), options);
        const auto before = build_effect_table(corpus, 1);
        const auto after = build_effect_table(reread, 1);
        CHECK(before == after);
    }

    TEST_CASE("manifest is byte-stable across reruns") {
        TempDir dir;
        spit(dir.file("input.csv"), "experiment_id,x\n");
        const std::vector<ManifestInput> inputs = {
            {"input.csv", file_digest(dir.file("input.csv"))}};
        BootstrapConfig bootstrap;
        bootstrap.num_resamples = 500;

        write_manifest("score", 42, Weights::defaults(), bootstrap, 0, 5, inputs,
                       {"reliability.csv", "effects.csv"}, dir.file("m1.json"));
        write_manifest("score", 42, Weights::defaults(), bootstrap, 0, 5, inputs,
                       {"reliability.csv", "effects.csv"}, dir.file("m2.json"));
        CHECK(slurp(dir.file("m1.json")) == slurp(dir.file("m2.json")));

        const std::string manifest = slurp(dir.file("m1.json"));
        CHECK(manifest.find("\"command\"") != std::string::npos);
        CHECK(manifest.find("\"score\"") != std::string::npos);
        CHECK(manifest.find("\"seed\"") != std::string::npos);
        CHECK(manifest.find(inputs[0].digest) != std::string::npos);
        // Nothing time-dependent may leak in.
        CHECK(manifest.find("time") == std::string::npos);
        CHECK(manifest.find("date") == std::string::npos);
    }
}

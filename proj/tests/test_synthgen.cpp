#include "doctest.h"

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "proxima/corpus.hpp"
#include "proxima/effects.hpp"
#include "proxima/scoring.hpp"
#include "proxima/synthgen.hpp"

using namespace proxima;

namespace {

SynthConfig small_config() {
    SynthConfig config;
    config.num_experiments = 6;
    config.units_per_arm = 40;
    config.num_segments = 3;
    config.seed = 91;
    return config;
}

}  // namespace

TEST_SUITE("synthgen") {
    TEST_CASE("same seed, same corpus; different seed, different corpus") {
        const auto a = generate(small_config());
        const auto b = generate(small_config());
        CHECK(a.corpus == b.corpus);
        CHECK(a.truth.implied_rho == b.truth.implied_rho);
        CHECK(a.truth.implied_fr == b.truth.implied_fr);

        auto other = small_config();
        other.seed = 92;
        CHECK_FALSE(generate(other).corpus == a.corpus);
    }

    TEST_CASE("thread count never changes the output") {
        auto config = small_config();
        config.threads = 1;
        const auto serial = generate(config);
        for (unsigned threads : {2u, 5u}) {
            config.threads = threads;
            CHECK(generate(config).corpus == serial.corpus);
        }
    }

    TEST_CASE("corpus shape matches the recipe") {
        const auto config = small_config();
        const auto output = generate(config);
        const auto& corpus = output.corpus;

        CHECK(corpus.experiments().size() == config.num_experiments);
        CHECK(corpus.segment_labels() ==
              std::vector<std::string>{"q0", "q1", "q2"});
        CHECK(corpus.schema().proxy_names == std::vector<std::string>{"proxy"});
        CHECK(corpus.schema().long_term_name == "long_term");
        for (const auto& experiment : corpus.experiments()) {
            CHECK(experiment.treated_count() == config.units_per_arm);
            CHECK(experiment.control_count() == config.units_per_arm);
        }
        CHECK(output.truth.experiments.size() == config.num_experiments);
        for (const auto& truth : output.truth.experiments)
            CHECK(truth.segments.size() == config.num_segments);
    }

    TEST_CASE("a noiseless faithful proxy scores perfectly") {
        SynthConfig config;
        config.num_experiments = 8;
        config.units_per_arm = 30;
        config.num_segments = 2;
        config.long_effect_mean = 1.0;
        config.long_effect_sd = 0.4;
        config.proxy_noise_sd = 0.0;
        config.default_flip_prob = 0.0;
        config.unit_noise_sd = 1e-9;  // must stay positive
        config.seed = 3;

        const auto output = generate(config);
        const auto table = build_effect_table(output.corpus, 2);
        const auto reports = score_all(table, output.corpus.schema(), Weights::defaults());
        REQUIRE(reports.size() == 1);
        CHECK(reports[0].components.corr_norm == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(reports[0].components.dir_acc == 1.0);
        CHECK(reports[0].components.frag_rate == 0.0);
        CHECK(reports[0].reliability == doctest::Approx(1.0).epsilon(1e-6));

        CHECK(output.truth.implied_da == 1.0);
        CHECK(output.truth.implied_fr == 0.0);
        CHECK(output.truth.implied_rho == doctest::Approx(1.0).epsilon(1e-9));
    }

    TEST_CASE("flip probability one inverts every segment") {
        SynthConfig config;
        config.num_experiments = 5;
        config.units_per_arm = 50;
        config.num_segments = 3;
        config.long_effect_mean = 2.0;
        config.long_effect_sd = 0.1;  // keep long effects clearly positive
        config.default_flip_prob = 1.0;
        config.unit_noise_sd = 1e-9;
        config.seed = 13;

        const auto output = generate(config);
        CHECK(output.truth.implied_fr == 1.0);
        for (const auto& truth : output.truth.experiments)
            for (const auto& segment : truth.segments) CHECK(segment.planted_flip);

        const auto table = build_effect_table(output.corpus, 2);
        const auto reports = score_all(table, output.corpus.schema(), Weights::defaults());
        CHECK(reports[0].components.frag_rate == doctest::Approx(1.0).epsilon(1e-9));
    }

    TEST_CASE("implied fragility equals the realised flag fraction") {
        SynthConfig config = small_config();
        config.default_flip_prob = 0.35;
        const auto output = generate(config);

        std::size_t flips = 0, cells = 0;
        for (const auto& truth : output.truth.experiments) {
            for (const auto& segment : truth.segments) {
                ++cells;
                if (segment.planted_flip) ++flips;
                // The flag must match the realised signs, not the coin toss.
                const bool disagrees =
                    sign_of(segment.proxy_effect) != sign_of(truth.long_effect);
                CHECK(segment.planted_flip == disagrees);
            }
        }
        CHECK(output.truth.implied_fr ==
              doctest::Approx(static_cast<double>(flips) / static_cast<double>(cells))
                  .epsilon(1e-12));
    }

    TEST_CASE("per-segment flip map targets only the named segment") {
        SynthConfig config;
        config.num_experiments = 12;
        config.units_per_arm = 20;
        config.num_segments = 3;
        config.long_effect_mean = 1.5;
        config.long_effect_sd = 0.1;
        config.default_flip_prob = 0.0;
        config.segment_flip_prob = {{"q1", 1.0}};
        config.unit_noise_sd = 0.5;
        config.seed = 44;

        const auto output = generate(config);
        for (const auto& truth : output.truth.experiments) {
            CHECK_FALSE(truth.segments[0].planted_flip);
            CHECK(truth.segments[1].planted_flip);
            CHECK_FALSE(truth.segments[2].planted_flip);
        }
        CHECK(output.truth.implied_fr == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }

    TEST_CASE("bernoulli mode emits only zeros and ones") {
        SynthConfig config;
        config.num_experiments = 3;
        config.units_per_arm = 60;
        config.num_segments = 2;
        config.long_effect_mean = 0.02;
        config.long_effect_sd = 0.005;
        config.bernoulli = true;
        config.bernoulli_base = 0.4;
        config.seed = 6;

        const auto output = generate(config);
        std::set<double> seen;
        for (const std::string name : {"proxy", "long_term"}) {
            const std::size_t idx = output.corpus.column_index(name);
            for (const auto& experiment : output.corpus.experiments())
                seen.insert(experiment.columns[idx].begin(), experiment.columns[idx].end());
        }
        for (double v : seen) CHECK((v == 0.0 || v == 1.0));

        // With a positive planted effect, treated success rates should
        // exceed control overall.
        const auto table = build_effect_table(output.corpus, 2);
        double total = 0.0;
        for (const auto& experiment : output.corpus.experiments())
            total += table.global(experiment.id, "long_term").tau;
        CHECK(total > -0.5);  // loose: rates live on [0,1]
    }

    TEST_CASE("recovered effects concentrate around the plant") {
        SynthConfig config;
        config.num_experiments = 4;
        config.units_per_arm = 4000;
        config.num_segments = 2;
        config.long_effect_mean = 1.0;
        config.long_effect_sd = 0.3;
        config.unit_noise_sd = 0.5;
        config.seed = 77;

        const auto output = generate(config);
        const auto table = build_effect_table(output.corpus, 2);
        for (std::size_t e = 0; e < output.truth.experiments.size(); ++e) {
            const auto& truth = output.truth.experiments[e];
            const double observed = table.global(truth.experiment_id, "long_term").tau;
            // se of the difference ~ sd * sqrt(2/n) ~ 0.011; allow ~5 se.
            CHECK(std::fabs(observed - truth.long_effect) < 0.06);
        }
    }

    TEST_CASE("invalid recipes are rejected") {
        SynthConfig config;
        config.num_experiments = 0;
        CHECK_THROWS(generate(config));

        config = {};
        config.units_per_arm = 0;
        CHECK_THROWS(generate(config));

        config = {};
        config.num_segments = 0;
        CHECK_THROWS(generate(config));

        config = {};
        config.default_flip_prob = 1.5;
        CHECK_THROWS(generate(config));

        config = {};
        config.segment_flip_prob = {{"q0", -0.1}};
        CHECK_THROWS(generate(config));

        config = {};
        config.unit_noise_sd = 0.0;  // gaussian mode needs spread
        CHECK_THROWS(generate(config));

        config = {};
        config.bernoulli = true;
        config.unit_noise_sd = 0.0;  // ignored in bernoulli mode
        CHECK_NOTHROW(generate(config));

        config = {};
        config.bernoulli = true;
        config.bernoulli_base = 1.2;
        CHECK_THROWS(generate(config));

        config = {};
        config.proxy_noise_sd = -0.5;
        CHECK_THROWS(generate(config));
    }
}

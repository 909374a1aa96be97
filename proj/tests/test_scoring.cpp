#include "doctest.h"

#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "proxima/corpus.hpp"
#include "proxima/effects.hpp"
#include "proxima/rng.hpp"
#include "proxima/scoring.hpp"

using namespace proxima;

namespace {

MetricSchema schema_two_proxies() {
    MetricSchema schema;
    schema.proxy_names = {"clicks", "watch"};
    schema.long_term_name = "retention";
    return schema;
}

UnitRecord unit(int treatment, const std::string& segment, double clicks, double watch,
                double retention) {
    UnitRecord rec;
    rec.treatment = treatment;
    rec.segment = segment;
    rec.metrics = {{"clicks", clicks}, {"watch", watch}, {"retention", retention}};
    return rec;
}

}  // namespace

TEST_SUITE("scoring") {
    TEST_CASE("weights must be a non-negative unit simplex point") {
        CHECK_NOTHROW(Weights{0.6, 0.2, 0.2}.validate());
        CHECK_NOTHROW(Weights{1.0, 0.0, 0.0}.validate());
        CHECK_THROWS(Weights{0.5, 0.2, 0.2}.validate());   // sums to 0.9
        CHECK_THROWS(Weights{-0.2, 0.6, 0.6}.validate());  // negative component
        CHECK_THROWS(Weights{0.4, 0.4, 0.4}.validate());   // sums to 1.2
    }

    TEST_CASE("normalized correlation maps rho onto [0, 1]") {
        // This y was constructed so that pearson(x, y) = 0.42 exactly.
        const std::vector<double> x{1.0, 2.0, 3.0};
        const std::vector<double> y{2.2475221094049882, -0.49504421880997596,
                                    4.2475221094049882};
        const CorrelationScore score = normalized_correlation(x, y);
        REQUIRE(score.raw_rho.has_value());
        CHECK(*score.raw_rho == doctest::Approx(0.42).epsilon(1e-12));
        CHECK(score.corr_norm == doctest::Approx(0.71).epsilon(1e-12));
        CHECK(*score.raw_rho == doctest::Approx(oracle::pearson(x, y)).epsilon(1e-14));

        // Perfect correlation / anticorrelation hit the endpoints.
        const std::vector<double> up{1, 2, 3}, down{3, 2, 1};
        CHECK(normalized_correlation(up, up).corr_norm == doctest::Approx(1.0));
        CHECK(normalized_correlation(up, down).corr_norm == doctest::Approx(0.0));
    }

    TEST_CASE("constant series fall back to the 0.5 midpoint") {
        const std::vector<double> flat{2.0, 2.0, 2.0}, varied{1.0, 2.0, 3.0};
        for (const auto& [a, b] : {std::pair{flat, varied}, std::pair{varied, flat}}) {
            const CorrelationScore score = normalized_correlation(a, b);
            CHECK(score.corr_norm == 0.5);
            CHECK_FALSE(score.raw_rho.has_value());
        }
    }

    TEST_CASE("normalized correlation rejects too-short or mismatched input") {
        const std::vector<double> one{1.0}, two{1.0, 2.0};
        CHECK_THROWS(normalized_correlation(one, one));
        CHECK_THROWS(normalized_correlation(two, one));
    }

    TEST_CASE("directional accuracy uses a hard sign(0)") {
        const std::vector<double> proxy{1.0, -2.0, 0.0, 3.0};
        const std::vector<double> target{0.5, -1.0, 0.0, -3.0};
        // Agreements: +/+, -/-, 0/0; disagreement: +/-.
        CHECK(directional_accuracy(proxy, target) == doctest::Approx(0.75));

        // Zero only matches zero.
        const std::vector<double> zero{0.0}, pos{1.0}, empty;
        CHECK(directional_accuracy(zero, pos) == 0.0);
        CHECK(directional_accuracy(zero, zero) == 1.0);
        CHECK_THROWS(directional_accuracy(empty, empty));
    }

    TEST_CASE("fragility rate counts sign flips over countable cells") {
        // Experiment 1: retention lifts globally (+). Segment "us" has a
        // positive clicks effect (no flip), "eu" negative (flip), "apac" has
        // a one-unit arm (marker, excluded).
        const auto corpus = ExperimentCorpus::from_experiments(
            schema_two_proxies(),
            {{"e1",
              {unit(1, "us", 5, 1, 2), unit(1, "us", 6, 1, 2), unit(0, "us", 1, 1, 1),
               unit(0, "us", 2, 1, 1), unit(1, "eu", 1, 1, 2), unit(1, "eu", 2, 1, 2),
               unit(0, "eu", 5, 1, 1), unit(0, "eu", 6, 1, 1), unit(1, "apac", 9, 1, 2),
               unit(0, "apac", 1, 1, 1), unit(0, "apac", 2, 1, 1)}}});
        const EffectTable table = build_effect_table(corpus, 2);

        const FragilityRate rate = fragility_rate(table, "clicks", "retention");
        CHECK(rate.num_segments_counted == 2);
        CHECK(rate.num_flips == 1);
        CHECK(rate.rate == doctest::Approx(0.5));

        // The watch proxy is flat everywhere: tau = 0 in segments, global
        // long-term sign is +, so every countable cell flips.
        const FragilityRate flat = fragility_rate(table, "watch", "retention");
        CHECK(flat.num_segments_counted == 2);
        CHECK(flat.num_flips == 2);
        CHECK(flat.rate == doctest::Approx(1.0));
    }

    TEST_CASE("composite reproduces the published component arithmetic") {
        const Weights defaults = Weights::defaults();

        ComponentScores es;  // early-starts-like shape
        es.corr_norm = 0.71;
        es.dir_acc = 1.00;
        es.frag_rate = 0.13;
        CHECK(composite(es, defaults) == doctest::Approx(0.800).epsilon(1e-12));

        ComponentScores ks;  // the high-fragility regime
        ks.corr_norm = 0.61;
        ks.dir_acc = 0.97;
        ks.frag_rate = 0.68;
        CHECK(composite(ks, defaults) == doctest::Approx(0.624).epsilon(1e-12));
    }

    TEST_CASE("composite respects bounds, monotonicity, and the corner cases") {
        Rng rng(555);
        for (int trial = 0; trial < 200; ++trial) {
            ComponentScores s;
            s.corr_norm = rng.next_unit();
            s.dir_acc = rng.next_unit();
            s.frag_rate = rng.next_unit();
            double a = rng.next_unit(), b = rng.next_unit(), c = rng.next_unit();
            const double sum = a + b + c;
            if (sum == 0.0) continue;
            const Weights w{a / sum, b / sum, c / sum};

            const double r = composite(s, w);
            CHECK(r >= 0.0);
            CHECK(r <= 1.0);

            // Monotone: nudging a component moves R the right way.
            ComponentScores up = s;
            up.corr_norm = std::min(1.0, s.corr_norm + 0.1);
            CHECK(composite(up, w) >= r - 1e-15);
            ComponentScores worse = s;
            worse.frag_rate = std::min(1.0, s.frag_rate + 0.1);
            CHECK(composite(worse, w) <= r + 1e-15);
        }

        const Weights w{0.5, 0.25, 0.25};
        ComponentScores perfect{1.0, std::nullopt, 1.0, 0.0, 0, 0, 0};
        CHECK(composite(perfect, w) == doctest::Approx(1.0).epsilon(1e-15));
        ComponentScores worst{0.0, std::nullopt, 0.0, 1.0, 0, 0, 0};
        CHECK(composite(worst, w) == doctest::Approx(0.0).epsilon(1e-15));
    }

    TEST_CASE("score_all produces one ranked report per proxy") {
        // clicks tracks retention; watch anti-tracks it.
        std::vector<std::pair<std::string, std::vector<UnitRecord>>> experiments;
        Rng rng(808);
        for (int e = 0; e < 8; ++e) {
            const double lift = (e % 2 == 0) ? 1.0 : -1.0;
            std::vector<UnitRecord> units;
            for (int u = 0; u < 30; ++u) {
                const int arm = u % 2;
                const double noise = 0.01 * rng.normal(0, 1);
                units.push_back(unit(arm, u % 3 == 0 ? "us" : "eu",
                                     arm * lift + noise, -arm * lift + noise,
                                     arm * lift + noise));
            }
            experiments.emplace_back("e" + std::to_string(e), std::move(units));
        }
        const auto corpus =
            ExperimentCorpus::from_experiments(schema_two_proxies(), experiments);
        const EffectTable table = build_effect_table(corpus, 5);

        const auto reports = score_all(table, corpus.schema(), Weights::defaults());
        REQUIRE(reports.size() == 2);
        CHECK(reports[0].proxy == "clicks");
        CHECK(reports[1].proxy == "watch");
        CHECK(reports[0].reliability > 0.9);
        CHECK(reports[1].reliability < 0.1);
        CHECK(reports[0].components.dir_acc == doctest::Approx(1.0));
        CHECK(reports[1].components.dir_acc == doctest::Approx(0.0));
        CHECK(reports[0].warnings.empty());
    }

    TEST_CASE("score_all agrees with the straight-line reference") {
        Rng rng(4242);
        std::vector<std::pair<std::string, std::vector<UnitRecord>>> experiments;
        for (int e = 0; e < 6; ++e) {
            std::vector<UnitRecord> units;
            for (int u = 0; u < 50; ++u) {
                units.push_back(unit(u % 2, "s" + std::to_string(u % 4), rng.normal(0.2, 1),
                                     rng.normal(-0.1, 1), rng.normal(0.1, 1)));
            }
            experiments.emplace_back("e" + std::to_string(e), std::move(units));
        }
        const auto corpus =
            ExperimentCorpus::from_experiments(schema_two_proxies(), experiments);
        const EffectTable table = build_effect_table(corpus, 4);
        const Weights weights{0.6, 0.2, 0.2};
        const auto reports = score_all(table, corpus.schema(), weights);

        for (const auto& report : reports) {
            const oracle::BruteScores brute =
                oracle::brute_score(corpus, report.proxy, "retention", 4, weights);
            CHECK(report.components.corr_norm == doctest::Approx(brute.corr_norm).epsilon(1e-12));
            CHECK(report.components.dir_acc == doctest::Approx(brute.da).epsilon(1e-12));
            CHECK(report.components.frag_rate == doctest::Approx(brute.fr).epsilon(1e-12));
            CHECK(report.reliability == doctest::Approx(brute.r).epsilon(1e-12));
            CHECK(report.components.num_flips == brute.flips);
            CHECK(report.components.num_segments_counted == brute.counted);
        }
    }

    TEST_CASE("score_all needs two experiments and flags degeneracies") {
        const auto single = ExperimentCorpus::from_experiments(
            schema_two_proxies(),
            {{"only", {unit(1, "us", 1, 1, 1), unit(0, "us", 2, 2, 2)}}});
        const EffectTable table = build_effect_table(single, 1);
        CHECK_THROWS(score_all(table, single.schema(), Weights::defaults()));

        // Two experiments with identical effects: constant series -> 0.5
        // fallback plus a warning; no countable segments -> FR warning.
        const auto degenerate = ExperimentCorpus::from_experiments(
            schema_two_proxies(),
            {{"e1", {unit(1, "us", 2, 2, 2), unit(0, "us", 1, 1, 1)}},
             {"e2", {unit(1, "us", 2, 2, 2), unit(0, "us", 1, 1, 1)}}});
        const EffectTable deg_table = build_effect_table(degenerate, 5);
        const auto reports = score_all(deg_table, degenerate.schema(), Weights::defaults());
        REQUIRE(reports.size() == 2);
        for (const auto& report : reports) {
            CHECK(report.components.corr_norm == 0.5);
            CHECK_FALSE(report.components.raw_rho.has_value());
            CHECK(report.components.num_segments_counted == 0);
            CHECK(report.components.frag_rate == 0.0);
            REQUIRE(report.warnings.size() == 2);
            CHECK(report.warnings[0].find("correlation undefined") != std::string::npos);
            CHECK(report.warnings[1].find("fragility") != std::string::npos);
        }
    }
}

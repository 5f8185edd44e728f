#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "rfwaste/stats.hpp"
#include "test_support.hpp"

using Catch::Matchers::WithinAbs;
using namespace rfwaste;
using testsupport::session_of;

TEST_CASE("constant session") {
    const auto summary = summarize(session_of({-31.0, -31.0, -31.0}));
    CHECK(summary.n == 3);
    CHECK(summary.mean_dbm == -31.0);
    CHECK(summary.median_dbm == -31.0);
    CHECK(summary.std_dbm == 0.0);
    CHECK(summary.min_dbm == -31.0);
    CHECK(summary.max_dbm == -31.0);
}

TEST_CASE("two-point session") {
    const auto summary = summarize(session_of({-22.0, -24.0}));
    CHECK(summary.median_dbm == -23.0);
    CHECK(summary.mean_dbm == -23.0);
    CHECK_THAT(summary.std_dbm, WithinAbs(std::sqrt(2.0), 1e-12));
    CHECK(summary.min_dbm == -24.0);
    CHECK(summary.max_dbm == -22.0);
}

TEST_CASE("single reading has zero deviation") {
    const auto summary = summarize(session_of({-16.3}));
    CHECK(summary.n == 1);
    CHECK(summary.std_dbm == 0.0);
    CHECK(summary.median_dbm == -16.3);
}

TEST_CASE("empty session is rejected") {
    CHECK_THROWS_AS(summarize(ReadingSession{}), EmptySessionError);
}

TEST_CASE("summaries agree with the brute-force oracle") {
    std::mt19937 rng(8201);
    std::uniform_real_distribution<double> value(-120.0, 0.0);
    std::uniform_int_distribution<std::size_t> length(1, 50);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> values(length(rng));
        for (double& v : values) v = value(rng);
        const auto oracle = testsupport::oracle_summary(values);
        const auto summary = summarize(session_of(values));
        CHECK(summary.n == oracle.n);
        CHECK_THAT(summary.mean_dbm, WithinAbs(oracle.mean, 1e-12));
        CHECK_THAT(summary.median_dbm, WithinAbs(oracle.median, 1e-12));
        CHECK_THAT(summary.std_dbm, WithinAbs(oracle.std_dev, 1e-12));
        CHECK(summary.min_dbm == oracle.min);
        CHECK(summary.max_dbm == oracle.max);
    }
}

TEST_CASE("shifting every reading shifts the location statistics only") {
    std::mt19937 rng(8202);
    std::uniform_real_distribution<double> value(-90.0, -10.0);
    std::uniform_real_distribution<double> shift(-25.0, 25.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> values(12);
        for (double& v : values) v = value(rng);
        const double c = shift(rng);
        std::vector<double> shifted = values;
        for (double& v : shifted) v += c;

        const auto base = summarize(session_of(values));
        const auto moved = summarize(session_of(shifted));
        CHECK_THAT(moved.mean_dbm, WithinAbs(base.mean_dbm + c, 1e-9));
        CHECK_THAT(moved.median_dbm, WithinAbs(base.median_dbm + c, 1e-9));
        CHECK_THAT(moved.min_dbm, WithinAbs(base.min_dbm + c, 1e-9));
        CHECK_THAT(moved.max_dbm, WithinAbs(base.max_dbm + c, 1e-9));
        CHECK_THAT(moved.std_dbm, WithinAbs(base.std_dbm, 1e-9));
    }
}

TEST_CASE("reading order is metadata only") {
    std::mt19937 rng(8203);
    std::uniform_real_distribution<double> value(-60.0, -20.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> values(15);
        for (double& v : values) v = value(rng);
        const auto base = summarize(session_of(values));
        std::shuffle(values.begin(), values.end(), rng);
        const auto shuffled = summarize(session_of(values));
        CHECK_THAT(shuffled.mean_dbm, WithinAbs(base.mean_dbm, 1e-12));
        CHECK(shuffled.median_dbm == base.median_dbm);
        CHECK(shuffled.min_dbm == base.min_dbm);
        CHECK(shuffled.max_dbm == base.max_dbm);
        CHECK_THAT(shuffled.std_dbm, WithinAbs(base.std_dbm, 1e-12));
    }
}

TEST_CASE("material effect is the median difference") {
    SessionSummary with_material;
    with_material.median_dbm = -37.0;
    SessionSummary empty;
    empty.median_dbm = -31.0;
    CHECK(material_effect_db(with_material, empty) == -6.0);
    CHECK(material_effect_db(empty, empty) == 0.0);
    CHECK(material_effect_db(empty, with_material) == -material_effect_db(with_material, empty));
}

TEST_CASE("stability verdicts") {
    SessionSummary summary;
    summary.std_dbm = 0.60;
    CHECK(stability_check(summary).stable);

    summary.std_dbm = 0.87;
    CHECK(stability_check(summary).stable);

    summary.std_dbm = 0.0;
    CHECK(stability_check(summary, 0.01).stable);

    summary.std_dbm = 1.5;
    const auto verdict = stability_check(summary);
    CHECK_FALSE(verdict.stable);
    CHECK(verdict.std_dbm == 1.5);

    CHECK_THROWS_AS(stability_check(summary, 0.0), std::domain_error);
    CHECK_THROWS_AS(stability_check(summary, -1.0), std::domain_error);
}

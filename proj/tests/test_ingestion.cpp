#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <string>

#include "rfwaste/ingestion.hpp"
#include "test_support.hpp"

using Catch::Matchers::ContainsSubstring;
using namespace rfwaste;

namespace {

CalibrationProfile sample_profile() {
    CalibrationProfile profile;
    profile.model = fit_interpolating_polynomial(testsupport::reference_points());
    profile.created_at = "2026-08-11T00:00:00Z";
    profile.device = {20.0, 915e6, TxPosition::above};
    profile.points = testsupport::reference_points();
    return profile;
}

}  // namespace

TEST_CASE("serial-monitor session with headers") {
    const auto result = parse_session_log(
        "# environment = indoor_open\n"
        "# material = food\n"
        "# weight_lb = 17\n"
        "# tx_power_dbm = 20\n"
        "# tx_position = above\n"
        "# fill_percent = 40\n"
        "RSSI: -31\n"
        "RSSI: -31\n"
        "RSSI: -37\n");
    REQUIRE(result.ok());
    const ReadingSession& session = result.session;
    REQUIRE(session.readings.size() == 3);
    CHECK(session.readings[0].sequence_index == 0);
    CHECK(session.readings[2].sequence_index == 2);
    CHECK(session.readings[2].rssi_dbm == -37.0);
    CHECK(session.meta.environment == "indoor_open");
    CHECK(session.meta.material == "food");
    CHECK(session.meta.weight_lb == 17.0);
    CHECK(session.meta.tx_power_dbm == 20.0);
    CHECK(session.meta.tx_position == TxPosition::above);
    CHECK(session.meta.fill_percent == 40.0);
}

TEST_CASE("CRLF, blank lines and scientific notation are accepted") {
    const auto result = parse_session_log("RSSI: -3.1e1\r\n\r\nRSSI: +31.5\r\n");
    REQUIRE(result.ok());
    REQUIRE(result.session.readings.size() == 2);
    CHECK(result.session.readings[0].rssi_dbm == -31.0);
    CHECK(result.session.readings[1].rssi_dbm == 31.5);
}

TEST_CASE("empty input is an empty-session error") {
    const auto result = parse_session_log("");
    REQUIRE_FALSE(result.ok());
    CHECK(result.errors[0].line == 0);
    CHECK_THAT(result.errors[0].message, ContainsSubstring("empty session"));

    const auto headers_only = parse_session_log("# environment = outdoor\n");
    REQUIRE_FALSE(headers_only.ok());
}

TEST_CASE("malformed lines are reported with their line number") {
    const auto result = parse_session_log(
        "RSSI: -31\n"
        "RSSI: -31\n"
        "RSSI: -32\n"
        "RSSI: abc\n");
    REQUIRE_FALSE(result.ok());
    REQUIRE(result.errors.size() == 1);
    CHECK(result.errors[0].line == 4);
    CHECK(result.session.readings.empty());  // whole-file rejection
}

TEST_CASE("header validation") {
    CHECK_FALSE(parse_session_log("# weight_lb = heavy\nRSSI: -30\n").ok());
    CHECK_FALSE(parse_session_log("# color = red\nRSSI: -30\n").ok());
    CHECK_FALSE(parse_session_log("# no equals sign\nRSSI: -30\n").ok());
    CHECK_FALSE(parse_session_log("# tx_position = sideways\nRSSI: -30\n").ok());
}

TEST_CASE("non-finite readings are rejected") {
    CHECK_FALSE(parse_session_log("RSSI: inf\n").ok());
    CHECK_FALSE(parse_session_log("RSSI: nan\n").ok());
    CHECK_FALSE(parse_session_log("0,inf\n").ok());
}

TEST_CASE("CSV body form") {
    const auto result = parse_session_log("3,-31\n7,-31.5\n9,-32\n");
    REQUIRE(result.ok());
    REQUIRE(result.session.readings.size() == 3);
    CHECK(result.session.readings[0].sequence_index == 3);
    CHECK(result.session.readings[1].rssi_dbm == -31.5);

    CHECK_FALSE(parse_session_log("3,-31\n3,-31\n").ok());    // repeated index
    CHECK_FALSE(parse_session_log("3,-31\n2,-31\n").ok());    // decreasing index
    CHECK_FALSE(parse_session_log("-1,-31\n").ok());          // negative index
    CHECK_FALSE(parse_session_log("1.5,-31\n").ok());         // fractional index
    CHECK_FALSE(parse_session_log("RSSI: -31\n2,-31\n").ok());  // mixed forms
    CHECK_FALSE(parse_session_log("2,-31\nRSSI: -31\n").ok());
}

TEST_CASE("a formatted session parses back identically") {
    ReadingSession session;
    session.meta.environment = "indoor_lab";
    session.meta.material = "bin liner+produce";
    session.meta.weight_lb = 30.8;
    session.meta.tx_power_dbm = 20.0;
    session.meta.tx_position = TxPosition::below;
    session.readings = {{0, -22.035904443283973}, {1, -31.5}, {2, -33.0}};

    const auto result = parse_session_log(format_session_log(session));
    REQUIRE(result.ok());
    REQUIRE(result.session.readings.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(result.session.readings[i].rssi_dbm == session.readings[i].rssi_dbm);
        CHECK(result.session.readings[i].sequence_index == i);
    }
    CHECK(result.session.meta.environment == session.meta.environment);
    CHECK(result.session.meta.material == session.meta.material);
    CHECK(result.session.meta.weight_lb == session.meta.weight_lb);
    CHECK(result.session.meta.tx_position == session.meta.tx_position);
}

TEST_CASE("csv pair reader") {
    const auto pairs = parse_csv_pairs("# columns: weight_lb,median_rssi_dbm\n30.8,-33\n43.8,-33.5\n");
    REQUIRE(pairs.ok());
    REQUIRE(pairs.rows.size() == 2);
    CHECK(pairs.rows[0] == std::pair{30.8, -33.0});
    CHECK(pairs.rows[1] == std::pair{43.8, -33.5});

    const auto bad = parse_csv_pairs("30.8\n");
    REQUIRE_FALSE(bad.ok());
    CHECK(bad.errors[0].line == 1);
}

TEST_CASE("profile round trip is exact") {
    const CalibrationProfile profile = sample_profile();
    const CalibrationProfile loaded = profile_from_text(profile_to_text(profile));

    REQUIRE(loaded.model.coefficients.size() == profile.model.coefficients.size());
    for (std::size_t i = 0; i < profile.model.coefficients.size(); ++i) {
        CHECK(loaded.model.coefficients[i] == profile.model.coefficients[i]);  // bit-faithful
    }
    CHECK(loaded.model.weight_min_lb == profile.model.weight_min_lb);
    CHECK(loaded.model.weight_max_lb == profile.model.weight_max_lb);
    CHECK(loaded.model.empty_rssi_dbm == profile.model.empty_rssi_dbm);
    CHECK(loaded.created_at == profile.created_at);
    CHECK(loaded.device.tx_power_dbm == profile.device.tx_power_dbm);
    CHECK(loaded.device.frequency_hz == profile.device.frequency_hz);
    CHECK(loaded.device.tx_position == profile.device.tx_position);
    REQUIRE(loaded.points.size() == profile.points.size());
    for (std::size_t i = 0; i < profile.points.size(); ++i) {
        CHECK(loaded.points[i].cumulative_weight_lb == profile.points[i].cumulative_weight_lb);
        CHECK(loaded.points[i].median_rssi_dbm == profile.points[i].median_rssi_dbm);
    }
}

TEST_CASE("profile file round trip") {
    const auto path = std::filesystem::temp_directory_path() / "rfwaste_profile_test.json";
    const CalibrationProfile profile = sample_profile();
    save_profile(profile, path);
    const CalibrationProfile loaded = load_profile(path);
    CHECK(loaded.model.coefficients == profile.model.coefficients);
    std::filesystem::remove(path);
}

TEST_CASE("profile validation rejects malformed documents") {
    const std::string text = profile_to_text(sample_profile());

    CHECK_THROWS_AS(profile_from_text("not json"), ProfileError);

    auto version2 = nlohmann::json::parse(text);
    version2["version"] = 2;
    CHECK_THROWS_AS(profile_from_text(version2.dump()), ProfileError);

    auto missing = nlohmann::json::parse(text);
    missing.erase("created_at");
    CHECK_THROWS_AS(profile_from_text(missing.dump()), ProfileError);

    auto unknown = nlohmann::json::parse(text);
    unknown["comment"] = "hello";
    CHECK_THROWS_AS(profile_from_text(unknown.dump()), ProfileError);

    auto unknown_nested = nlohmann::json::parse(text);
    unknown_nested["model"]["rmse"] = 0.1;
    CHECK_THROWS_AS(profile_from_text(unknown_nested.dump()), ProfileError);

    // degree 3 declared with only 3 coefficients
    auto arity = nlohmann::json::parse(text);
    arity["model"]["coefficients"].erase(3);
    CHECK_THROWS_AS(profile_from_text(arity.dump()), ProfileError);

    auto baseline = nlohmann::json::parse(text);
    baseline["model"]["empty_rssi_dbm"] = -21.0;
    CHECK_THROWS_AS(profile_from_text(baseline.dump()), ProfileError);

    auto position = nlohmann::json::parse(text);
    position["device"]["tx_position"] = "sideways";
    CHECK_THROWS_AS(profile_from_text(position.dump()), ProfileError);

    auto range = nlohmann::json::parse(text);
    range["model"]["weight_range_lb"] = {43.8, 0.0};
    CHECK_THROWS_AS(profile_from_text(range.dump()), ProfileError);
}

TEST_CASE("profile consistency check") {
    const CalibrationProfile profile = sample_profile();
    CHECK(check_profile_consistency(profile).empty());

    CalibrationProfile tampered = profile;
    tampered.model.coefficients[1] += 0.01;
    tampered.model.empty_rssi_dbm = tampered.model.coefficients[0];
    const auto warnings = check_profile_consistency(tampered);
    REQUIRE_FALSE(warnings.empty());
    CHECK_THAT(warnings[0], ContainsSubstring("coefficient 1"));

    CalibrationProfile no_points = profile;
    no_points.points.clear();
    CHECK(check_profile_consistency(no_points).empty());
}

#pragma once

// Session-log parsing and calibration-profile persistence.
//
// Session logs are UTF-8 text, LF or CRLF. Header lines are `# key = value`;
// body lines are either serial-monitor style `RSSI: <number>` or CSV
// `<seq>,<number>`. A file uses one body form throughout. Any malformed
// line rejects the whole file: partial sessions silently bias medians.
//
// Profiles and the report CSV use full-precision decimal text so that a
// save/load round trip is bit-faithful. Field names are pinned in
// docs/formats.md; version 1 rejects unknown fields.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rfwaste/calibration.hpp"
#include "rfwaste/session.hpp"

namespace rfwaste {

struct ParseDiagnostic {
    std::size_t line = 0;  // 1-based; 0 = whole-file problem
    std::string message;
};

struct SessionParseResult {
    ReadingSession session;
    std::vector<ParseDiagnostic> errors;
    bool ok() const { return errors.empty(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

/// Locale-independent full-string double parse; the decimal point is `.`
/// regardless of host environment. Rejects inf/nan.
inline bool parse_double(std::string_view text, double& out) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return false;
    double value = 0.0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc{} || result.ptr != text.data() + text.size()) return false;
    if (!std::isfinite(value)) return false;
    out = value;
    return true;
}

inline bool parse_index(std::string_view text, std::size_t& out) {
    text = trim(text);
    if (text.empty()) return false;
    std::size_t value = 0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc{} || result.ptr != text.data() + text.size()) return false;
    out = value;
    return true;
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, result.ptr);
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (end == text.size()) break;
        start = end + 1;
    }
    return lines;
}

}  // namespace detail

/// Parses a session log. Every input either yields a valid session or a
/// diagnostic per malformed line; nothing is dropped silently.
inline SessionParseResult parse_session_log(std::string_view text) {
    SessionParseResult result;
    enum class BodyForm { unknown, serial, csv };
    BodyForm form = BodyForm::unknown;
    std::size_t line_number = 0;
    bool have_previous_index = false;
    std::size_t previous_index = 0;

    for (std::string_view raw : detail::split_lines(text)) {
        ++line_number;
        const std::string_view line = detail::trim(raw);
        if (line.empty()) continue;

        if (line.front() == '#') {
            std::string_view rest = detail::trim(line.substr(1));
            const std::size_t eq = rest.find('=');
            if (eq == std::string_view::npos) {
                result.errors.push_back({line_number, "header line is not `# key = value`"});
                continue;
            }
            const std::string key{detail::trim(rest.substr(0, eq))};
            const std::string_view value = detail::trim(rest.substr(eq + 1));
            double number = 0.0;
            if (key == "environment") {
                result.session.meta.environment = std::string(value);
            } else if (key == "material") {
                result.session.meta.material = std::string(value);
            } else if (key == "weight_lb") {
                if (detail::parse_double(value, number)) {
                    result.session.meta.weight_lb = number;
                } else {
                    result.errors.push_back({line_number, "weight_lb is not a number"});
                }
            } else if (key == "tx_power_dbm") {
                if (detail::parse_double(value, number)) {
                    result.session.meta.tx_power_dbm = number;
                } else {
                    result.errors.push_back({line_number, "tx_power_dbm is not a number"});
                }
            } else if (key == "fill_percent") {
                if (detail::parse_double(value, number)) {
                    result.session.meta.fill_percent = number;
                } else {
                    result.errors.push_back({line_number, "fill_percent is not a number"});
                }
            } else if (key == "tx_position") {
                const auto position = tx_position_from_string(value);
                if (position) {
                    result.session.meta.tx_position = position;
                } else {
                    result.errors.push_back({line_number, "tx_position must be above or below"});
                }
            } else {
                result.errors.push_back({line_number, "unknown header key `" + key + "`"});
            }
            continue;
        }

        if (line.starts_with("RSSI:")) {
            if (form == BodyForm::csv) {
                result.errors.push_back({line_number, "serial-style line in a CSV-body file"});
                continue;
            }
            form = BodyForm::serial;
            double value = 0.0;
            if (!detail::parse_double(line.substr(5), value)) {
                result.errors.push_back({line_number, "RSSI value is not a finite number"});
                continue;
            }
            result.session.readings.push_back({result.session.readings.size(), value});
            continue;
        }

        const std::size_t comma = line.find(',');
        if (comma != std::string_view::npos) {
            if (form == BodyForm::serial) {
                result.errors.push_back({line_number, "CSV line in a serial-body file"});
                continue;
            }
            form = BodyForm::csv;
            std::size_t index = 0;
            double value = 0.0;
            if (!detail::parse_index(line.substr(0, comma), index)) {
                result.errors.push_back({line_number, "sequence index is not a non-negative integer"});
                continue;
            }
            if (!detail::parse_double(line.substr(comma + 1), value)) {
                result.errors.push_back({line_number, "RSSI value is not a finite number"});
                continue;
            }
            if (have_previous_index && index <= previous_index) {
                result.errors.push_back({line_number, "sequence index must be strictly increasing"});
                continue;
            }
            previous_index = index;
            have_previous_index = true;
            result.session.readings.push_back({index, value});
            continue;
        }

        result.errors.push_back({line_number, "unrecognized line (expected header or reading)"});
    }

    if (result.errors.empty() && result.session.readings.empty()) {
        result.errors.push_back({0, "empty session: no readings"});
    }
    if (!result.errors.empty()) {
        result.session = ReadingSession{};  // whole-file rejection
    }
    return result;
}

inline SessionParseResult parse_session_log_file(const std::filesystem::path& path) {
    std::ifstream input(path, std::ios::binary);
    if (!input) {
        SessionParseResult result;
        result.errors.push_back({0, "cannot open " + path.string()});
        return result;
    }
    std::ostringstream buffer;
    buffer << input.rdbuf();
    return parse_session_log(buffer.str());
}

/// Serializes a session in the serial-monitor form; the result parses back
/// to the identical session.
inline std::string format_session_log(const ReadingSession& session) {
    std::string out;
    const SessionMeta& meta = session.meta;
    if (!meta.environment.empty()) out += "# environment = " + meta.environment + "\n";
    if (!meta.material.empty()) out += "# material = " + meta.material + "\n";
    if (meta.weight_lb) out += "# weight_lb = " + detail::format_double(*meta.weight_lb) + "\n";
    if (meta.tx_power_dbm) {
        out += "# tx_power_dbm = " + detail::format_double(*meta.tx_power_dbm) + "\n";
    }
    if (meta.tx_position) out += std::string("# tx_position = ") + to_string(*meta.tx_position) + "\n";
    if (meta.fill_percent) {
        out += "# fill_percent = " + detail::format_double(*meta.fill_percent) + "\n";
    }
    for (const RssiReading& reading : session.readings) {
        out += "RSSI: " + detail::format_double(reading.rssi_dbm) + "\n";
    }
    return out;
}

struct CsvPairsResult {
    std::vector<std::pair<double, double>> rows;
    std::vector<ParseDiagnostic> errors;
    bool ok() const { return errors.empty(); }
};

/// Generic `<number>,<number>` reader shared by session CSV bodies and the
/// report output; `#` lines and blanks are skipped.
inline CsvPairsResult parse_csv_pairs(std::string_view text) {
    CsvPairsResult result;
    std::size_t line_number = 0;
    for (std::string_view raw : detail::split_lines(text)) {
        ++line_number;
        const std::string_view line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const std::size_t comma = line.find(',');
        double first = 0.0;
        double second = 0.0;
        if (comma == std::string_view::npos ||
            !detail::parse_double(line.substr(0, comma), first) ||
            !detail::parse_double(line.substr(comma + 1), second)) {
            result.errors.push_back({line_number, "expected `<number>,<number>`"});
            continue;
        }
        result.rows.emplace_back(first, second);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Calibration profiles
// ---------------------------------------------------------------------------

struct DeviceConfig {
    double tx_power_dbm = 20.0;
    double frequency_hz = 915e6;
    TxPosition tx_position = TxPosition::above;
};

struct CalibrationProfile {
    CalibrationModel model;
    std::string created_at;  // ISO 8601 text
    DeviceConfig device;
    std::vector<CalibrationPoint> points;
};

struct ProfileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kProfileFormatVersion = 1;

namespace detail {

inline void require_fields(const nlohmann::json& object, std::string_view where,
                           std::initializer_list<const char*> fields) {
    if (!object.is_object()) {
        throw ProfileError(std::string(where) + " must be an object");
    }
    for (const char* field : fields) {
        if (!object.contains(field)) {
            throw ProfileError(std::string(where) + " is missing field `" + field + "`");
        }
    }
    for (const auto& item : object.items()) {
        bool known = false;
        for (const char* field : fields) {
            if (item.key() == field) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ProfileError("unknown field `" + item.key() + "` in " + std::string(where));
        }
    }
}

inline double number_field(const nlohmann::json& object, const char* field) {
    const auto& value = object.at(field);
    if (!value.is_number()) {
        throw ProfileError(std::string("field `") + field + "` must be a number");
    }
    return value.get<double>();
}

}  // namespace detail

inline std::string profile_to_text(const CalibrationProfile& profile) {
    if (profile.model.coefficients.empty()) {
        throw ProfileError("profile model has no coefficients");
    }
    nlohmann::json doc;
    doc["version"] = kProfileFormatVersion;
    doc["created_at"] = profile.created_at;
    doc["device"] = {{"tx_power_dbm", profile.device.tx_power_dbm},
                     {"frequency_hz", profile.device.frequency_hz},
                     {"tx_position", to_string(profile.device.tx_position)}};
    nlohmann::json points = nlohmann::json::array();
    for (const CalibrationPoint& point : profile.points) {
        points.push_back({{"weight_lb", point.cumulative_weight_lb},
                          {"median_rssi_dbm", point.median_rssi_dbm}});
    }
    doc["points"] = std::move(points);
    doc["model"] = {{"degree", profile.model.coefficients.size() - 1},
                    {"coefficients", profile.model.coefficients},
                    {"weight_range_lb",
                     {profile.model.weight_min_lb, profile.model.weight_max_lb}},
                    {"empty_rssi_dbm", profile.model.empty_rssi_dbm}};
    return doc.dump(2) + "\n";
}

inline CalibrationProfile profile_from_text(std::string_view text) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        throw ProfileError("profile is not valid JSON");
    }
    detail::require_fields(doc, "profile",
                           {"version", "created_at", "device", "points", "model"});
    if (!doc["version"].is_number_integer() ||
        doc["version"].get<int>() != kProfileFormatVersion) {
        throw ProfileError("unsupported profile version (expected 1)");
    }

    CalibrationProfile profile;
    if (!doc["created_at"].is_string()) {
        throw ProfileError("field `created_at` must be a string");
    }
    profile.created_at = doc["created_at"].get<std::string>();

    const auto& device = doc["device"];
    detail::require_fields(device, "device", {"tx_power_dbm", "frequency_hz", "tx_position"});
    profile.device.tx_power_dbm = detail::number_field(device, "tx_power_dbm");
    profile.device.frequency_hz = detail::number_field(device, "frequency_hz");
    if (!device["tx_position"].is_string()) {
        throw ProfileError("field `tx_position` must be a string");
    }
    const auto position = tx_position_from_string(device["tx_position"].get<std::string>());
    if (!position) {
        throw ProfileError("tx_position must be above or below");
    }
    profile.device.tx_position = *position;

    if (!doc["points"].is_array()) {
        throw ProfileError("field `points` must be an array");
    }
    for (const auto& entry : doc["points"]) {
        detail::require_fields(entry, "point", {"weight_lb", "median_rssi_dbm"});
        profile.points.push_back({detail::number_field(entry, "weight_lb"),
                                  detail::number_field(entry, "median_rssi_dbm")});
    }

    const auto& model = doc["model"];
    detail::require_fields(model, "model",
                           {"degree", "coefficients", "weight_range_lb", "empty_rssi_dbm"});
    if (!model["degree"].is_number_integer() || model["degree"].get<long long>() < 0) {
        throw ProfileError("model degree must be a non-negative integer");
    }
    if (!model["coefficients"].is_array() || model["coefficients"].empty()) {
        throw ProfileError("model coefficients must be a non-empty array");
    }
    for (const auto& c : model["coefficients"]) {
        if (!c.is_number()) throw ProfileError("model coefficients must be numbers");
        profile.model.coefficients.push_back(c.get<double>());
    }
    const auto degree = model["degree"].get<std::size_t>();
    if (profile.model.coefficients.size() != degree + 1) {
        throw ProfileError("model declares degree " + std::to_string(degree) + " but has " +
                           std::to_string(profile.model.coefficients.size()) + " coefficients");
    }
    const auto& range = model["weight_range_lb"];
    if (!range.is_array() || range.size() != 2 || !range[0].is_number() || !range[1].is_number()) {
        throw ProfileError("weight_range_lb must be an array of two numbers");
    }
    profile.model.weight_min_lb = range[0].get<double>();
    profile.model.weight_max_lb = range[1].get<double>();
    if (profile.model.weight_min_lb > profile.model.weight_max_lb) {
        throw ProfileError("weight_range_lb must be ordered [min, max]");
    }
    profile.model.empty_rssi_dbm = detail::number_field(model, "empty_rssi_dbm");
    if (std::abs(profile.model.empty_rssi_dbm - profile.model.coefficients[0]) > 1e-9) {
        throw ProfileError("empty_rssi_dbm must equal the constant coefficient");
    }
    return profile;
}

inline void save_profile(const CalibrationProfile& profile, const std::filesystem::path& path) {
    const std::string text = profile_to_text(profile);
    std::ofstream output(path, std::ios::binary);
    if (!output || !(output << text)) {
        throw ProfileError("cannot write profile to " + path.string());
    }
}

inline CalibrationProfile load_profile(const std::filesystem::path& path) {
    std::ifstream input(path, std::ios::binary);
    if (!input) {
        throw ProfileError("cannot open profile " + path.string());
    }
    std::ostringstream buffer;
    buffer << input.rdbuf();
    return profile_from_text(buffer.str());
}

/// Cross-checks the stored points against the stored model: refitting the
/// points must reproduce the coefficients to 1e-6 relative. Returns
/// human-readable warnings; an empty result means consistent.
inline std::vector<std::string> check_profile_consistency(const CalibrationProfile& profile,
                                                          double tolerance_rel = 1e-6) {
    std::vector<std::string> warnings;
    if (profile.points.size() < 2) return warnings;

    CalibrationModel refit;
    try {
        refit = fit_interpolating_polynomial(profile.points);
    } catch (const std::invalid_argument& error) {
        warnings.push_back(std::string("stored points cannot be refitted: ") + error.what());
        return warnings;
    }
    if (refit.coefficients.size() != profile.model.coefficients.size()) {
        warnings.push_back("stored points refit to degree " +
                           std::to_string(refit.coefficients.size() - 1) +
                           " but the profile stores degree " +
                           std::to_string(profile.model.coefficients.size() - 1));
        return warnings;
    }
    for (std::size_t i = 0; i < refit.coefficients.size(); ++i) {
        const double stored = profile.model.coefficients[i];
        const double refitted = refit.coefficients[i];
        const double scale = std::max({std::abs(stored), std::abs(refitted), 1e-30});
        if (std::abs(stored - refitted) / scale > tolerance_rel) {
            warnings.push_back("coefficient " + std::to_string(i) +
                               " disagrees with a refit of the stored points (stored " +
                               detail::format_double(stored) + ", refit " +
                               detail::format_double(refitted) + ")");
        }
    }
    return warnings;
}

}  // namespace rfwaste

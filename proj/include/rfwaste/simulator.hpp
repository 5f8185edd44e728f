#pragma once

// Deterministic stand-in for the transceiver pair and trash bin: generates
// RSSI sessions from a physical scenario so the full pipeline runs without
// hardware.
//
// Randomness contract, frozen for reproducibility: the generator is
// std::mt19937_64 seeded with the scenario seed; each Gaussian draw
// consumes exactly two 64-bit outputs and applies the basic Box-Muller
// transform (cosine branch, no caching). Identical scenarios therefore
// produce identical sessions.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rfwaste/session.hpp"
#include "rfwaste/signal_model.hpp"

namespace rfwaste {

enum class EnvironmentKind { indoor_lab, indoor_open, outdoor };

inline const char* to_string(EnvironmentKind kind) {
    switch (kind) {
        case EnvironmentKind::indoor_lab: return "indoor_lab";
        case EnvironmentKind::indoor_open: return "indoor_open";
        default: return "outdoor";
    }
}

inline std::optional<EnvironmentKind> environment_kind_from_string(std::string_view text) {
    if (text == "indoor_lab") return EnvironmentKind::indoor_lab;
    if (text == "indoor_open") return EnvironmentKind::indoor_open;
    if (text == "outdoor") return EnvironmentKind::outdoor;
    return std::nullopt;
}

/// Default multipath offsets encode only the observed qualitative ordering:
/// confined indoor spaces reflect more signal toward the receiver than open
/// or outdoor ones. They are configuration, not ground truth.
inline double default_multipath_offset_db(EnvironmentKind kind) {
    switch (kind) {
        case EnvironmentKind::indoor_lab: return 3.0;
        case EnvironmentKind::indoor_open: return 0.0;
        default: return -2.0;
    }
}

struct Environment {
    EnvironmentKind kind = EnvironmentKind::indoor_open;
    double multipath_offset_db = 0.0;
};

inline Environment make_environment(EnvironmentKind kind) {
    return {kind, default_multipath_offset_db(kind)};
}

/// Bin contents entry: how much the item weighs and how much it attenuates.
struct WeightedLayer {
    double weight_lb = 0.0;
    MaterialLayer layer;
};

struct Scenario {
    LinkBudget budget;
    Environment environment = make_environment(EnvironmentKind::indoor_open);
    std::vector<WeightedLayer> contents;
    double attenuation_per_lb_db = 0.0;    // rate for weight-derived fill layers
    double noise_sigma_db = 0.0;
    double ground_coupling_offset_db = 0.0;  // bin-raising fixtures near the ground unit
    double quantize_step_db = 0.0;           // 0 = off; 0.5 mimics half-dB registers
    std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultReadingsPerSession = 10;

/// mt19937_64 + Box-Muller, two engine outputs per draw. The uniforms use
/// the top 53 bits, u1 shifted into (0, 1] so the log never sees zero.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        const double u1 =
            (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;  // [0, 1)
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

namespace detail {

inline void validate_scenario(const Scenario& scenario) {
    if (!(scenario.budget.distance_m > 0.0)) {
        throw std::invalid_argument("scenario: budget.distance_m must be > 0");
    }
    if (!(scenario.budget.frequency_hz > 0.0)) {
        throw std::invalid_argument("scenario: budget.frequency_hz must be > 0");
    }
    if (!(scenario.noise_sigma_db >= 0.0) || !std::isfinite(scenario.noise_sigma_db)) {
        throw std::invalid_argument("scenario: noise_sigma_db must be finite and >= 0");
    }
    if (!(scenario.quantize_step_db >= 0.0) || !std::isfinite(scenario.quantize_step_db)) {
        throw std::invalid_argument("scenario: quantize_step_db must be finite and >= 0");
    }
    for (const WeightedLayer& content : scenario.contents) {
        if (!std::isfinite(content.layer.attenuation_db)) {
            throw std::invalid_argument("scenario: layer attenuation must be finite");
        }
        if (!std::isfinite(content.weight_lb) || content.weight_lb < 0.0) {
            throw std::invalid_argument("scenario: content weight must be finite and >= 0");
        }
    }
}

inline ReadingSession simulate_with(const Scenario& scenario, std::size_t n_readings,
                                    GaussianSampler& noise) {
    std::vector<MaterialLayer> layers;
    layers.reserve(scenario.contents.size());
    double total_weight_lb = 0.0;
    std::string materials;
    for (const WeightedLayer& content : scenario.contents) {
        layers.push_back(content.layer);
        total_weight_lb += content.weight_lb;
        if (!content.layer.label.empty()) {
            if (!materials.empty()) materials += "+";
            materials += content.layer.label;
        }
    }

    const double base_dbm = expected_rssi_dbm(scenario.budget, layers) +
                            scenario.environment.multipath_offset_db +
                            scenario.ground_coupling_offset_db;

    ReadingSession session;
    session.readings.reserve(n_readings);
    for (std::size_t i = 0; i < n_readings; ++i) {
        double value = base_dbm;
        if (scenario.noise_sigma_db > 0.0) {
            value += scenario.noise_sigma_db * noise();
        }
        if (scenario.quantize_step_db > 0.0) {
            value = std::round(value / scenario.quantize_step_db) * scenario.quantize_step_db;
        }
        session.readings.push_back({i, value});
    }
    session.meta.environment = to_string(scenario.environment.kind);
    session.meta.material = std::move(materials);
    session.meta.tx_power_dbm = scenario.budget.tx_power_dbm;
    session.meta.weight_lb = total_weight_lb;
    return session;
}

}  // namespace detail

inline ReadingSession simulate_session(const Scenario& scenario,
                                       std::size_t n_readings = kDefaultReadingsPerSession) {
    if (n_readings < 1) {
        throw std::invalid_argument("simulate_session: n_readings must be >= 1");
    }
    detail::validate_scenario(scenario);
    GaussianSampler noise(scenario.seed);
    return detail::simulate_with(scenario, n_readings, noise);
}

/// One session per cumulative fill weight. Each weight contributes a fill
/// layer of attenuation_per_lb_db * weight on top of the base contents.
/// All sessions draw from one generator seeded once with the scenario
/// seed, so the series is reproducible as a whole.
inline std::vector<std::pair<double, ReadingSession>> simulate_fill_series(
    const Scenario& base, std::span<const double> weights_lb,
    std::size_t n_readings = kDefaultReadingsPerSession) {
    if (n_readings < 1) {
        throw std::invalid_argument("simulate_fill_series: n_readings must be >= 1");
    }
    for (std::size_t i = 1; i < weights_lb.size(); ++i) {
        if (weights_lb[i] < weights_lb[i - 1]) {
            throw std::invalid_argument("simulate_fill_series: weights must be sorted ascending");
        }
    }
    detail::validate_scenario(base);

    GaussianSampler noise(base.seed);
    std::vector<std::pair<double, ReadingSession>> series;
    series.reserve(weights_lb.size());
    for (double weight : weights_lb) {
        Scenario step = base;
        step.contents.push_back(
            {weight, {"fill", base.attenuation_per_lb_db * weight}});
        series.emplace_back(weight, detail::simulate_with(step, n_readings, noise));
    }
    return series;
}

// ---------------------------------------------------------------------------
// Scenario files (same structured-text conventions as profiles)
// ---------------------------------------------------------------------------

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kScenarioFormatVersion = 1;

inline std::string scenario_to_text(const Scenario& scenario) {
    nlohmann::json doc;
    doc["version"] = kScenarioFormatVersion;
    doc["budget"] = {{"tx_power_dbm", scenario.budget.tx_power_dbm},
                     {"tx_antenna_gain_dbi", scenario.budget.tx_antenna_gain_dbi},
                     {"rx_antenna_gain_dbi", scenario.budget.rx_antenna_gain_dbi},
                     {"system_gain_db", scenario.budget.system_gain_db},
                     {"frequency_hz", scenario.budget.frequency_hz},
                     {"distance_m", scenario.budget.distance_m}};
    doc["environment"] = {{"kind", to_string(scenario.environment.kind)},
                          {"multipath_offset_db", scenario.environment.multipath_offset_db}};
    nlohmann::json contents = nlohmann::json::array();
    for (const WeightedLayer& content : scenario.contents) {
        contents.push_back({{"weight_lb", content.weight_lb},
                            {"label", content.layer.label},
                            {"attenuation_db", content.layer.attenuation_db}});
    }
    doc["contents"] = std::move(contents);
    doc["attenuation_per_lb_db"] = scenario.attenuation_per_lb_db;
    doc["noise_sigma_db"] = scenario.noise_sigma_db;
    doc["ground_coupling_offset_db"] = scenario.ground_coupling_offset_db;
    doc["quantize_step_db"] = scenario.quantize_step_db;
    doc["seed"] = scenario.seed;
    return doc.dump(2) + "\n";
}

namespace detail {

inline double scenario_number(const nlohmann::json& object, const char* field,
                              double fallback) {
    if (!object.contains(field)) return fallback;
    if (!object.at(field).is_number()) {
        throw ScenarioError(std::string("scenario field `") + field + "` must be a number");
    }
    return object.at(field).get<double>();
}

inline void reject_unknown(const nlohmann::json& object, std::string_view where,
                           std::initializer_list<const char*> fields) {
    for (const auto& item : object.items()) {
        bool known = false;
        for (const char* field : fields) {
            if (item.key() == field) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ScenarioError("unknown field `" + item.key() + "` in " + std::string(where));
        }
    }
}

}  // namespace detail

/// Parses a scenario document. All fields except `version` are optional
/// and default to the empty indoor-open scenario; unknown fields are
/// rejected under version 1.
inline Scenario scenario_from_text(std::string_view text) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        throw ScenarioError("scenario is not valid JSON");
    }
    if (!doc.is_object() || !doc.contains("version")) {
        throw ScenarioError("scenario is missing field `version`");
    }
    if (!doc["version"].is_number_integer() ||
        doc["version"].get<int>() != kScenarioFormatVersion) {
        throw ScenarioError("unsupported scenario version (expected 1)");
    }
    detail::reject_unknown(doc, "scenario",
                           {"version", "budget", "environment", "contents",
                            "attenuation_per_lb_db", "noise_sigma_db",
                            "ground_coupling_offset_db", "quantize_step_db", "seed"});

    Scenario scenario;
    if (doc.contains("budget")) {
        const auto& budget = doc["budget"];
        detail::reject_unknown(budget, "budget",
                               {"tx_power_dbm", "tx_antenna_gain_dbi", "rx_antenna_gain_dbi",
                                "system_gain_db", "frequency_hz", "distance_m"});
        LinkBudget defaults;
        scenario.budget.tx_power_dbm =
            detail::scenario_number(budget, "tx_power_dbm", defaults.tx_power_dbm);
        scenario.budget.tx_antenna_gain_dbi =
            detail::scenario_number(budget, "tx_antenna_gain_dbi", defaults.tx_antenna_gain_dbi);
        scenario.budget.rx_antenna_gain_dbi =
            detail::scenario_number(budget, "rx_antenna_gain_dbi", defaults.rx_antenna_gain_dbi);
        scenario.budget.system_gain_db =
            detail::scenario_number(budget, "system_gain_db", defaults.system_gain_db);
        scenario.budget.frequency_hz =
            detail::scenario_number(budget, "frequency_hz", defaults.frequency_hz);
        scenario.budget.distance_m =
            detail::scenario_number(budget, "distance_m", defaults.distance_m);
    }
    if (doc.contains("environment")) {
        const auto& environment = doc["environment"];
        detail::reject_unknown(environment, "environment", {"kind", "multipath_offset_db"});
        if (!environment.contains("kind") || !environment["kind"].is_string()) {
            throw ScenarioError("environment requires a string field `kind`");
        }
        const auto kind = environment_kind_from_string(environment["kind"].get<std::string>());
        if (!kind) {
            throw ScenarioError("environment kind must be indoor_lab, indoor_open or outdoor");
        }
        scenario.environment = make_environment(*kind);
        scenario.environment.multipath_offset_db = detail::scenario_number(
            environment, "multipath_offset_db", scenario.environment.multipath_offset_db);
    }
    if (doc.contains("contents")) {
        if (!doc["contents"].is_array()) {
            throw ScenarioError("scenario contents must be an array");
        }
        for (const auto& entry : doc["contents"]) {
            detail::reject_unknown(entry, "contents entry",
                                   {"weight_lb", "label", "attenuation_db"});
            WeightedLayer content;
            content.weight_lb = detail::scenario_number(entry, "weight_lb", 0.0);
            content.layer.attenuation_db = detail::scenario_number(entry, "attenuation_db", 0.0);
            if (entry.contains("label")) {
                if (!entry["label"].is_string()) {
                    throw ScenarioError("contents label must be a string");
                }
                content.layer.label = entry["label"].get<std::string>();
            }
            scenario.contents.push_back(std::move(content));
        }
    }
    scenario.attenuation_per_lb_db =
        detail::scenario_number(doc, "attenuation_per_lb_db", scenario.attenuation_per_lb_db);
    scenario.noise_sigma_db =
        detail::scenario_number(doc, "noise_sigma_db", scenario.noise_sigma_db);
    scenario.ground_coupling_offset_db = detail::scenario_number(
        doc, "ground_coupling_offset_db", scenario.ground_coupling_offset_db);
    scenario.quantize_step_db =
        detail::scenario_number(doc, "quantize_step_db", scenario.quantize_step_db);
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer()) {
            throw ScenarioError("scenario seed must be an integer");
        }
        scenario.seed = doc["seed"].get<std::uint64_t>();
    }
    return scenario;
}

inline void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
    const std::string text = scenario_to_text(scenario);
    std::ofstream output(path, std::ios::binary);
    if (!output || !(output << text)) {
        throw ScenarioError("cannot write scenario to " + path.string());
    }
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream input(path, std::ios::binary);
    if (!input) {
        throw ScenarioError("cannot open scenario " + path.string());
    }
    std::ostringstream buffer;
    buffer << input.rdbuf();
    return scenario_from_text(buffer.str());
}

}  // namespace rfwaste

#pragma once

// Link-budget arithmetic for a transceiver pair mounted across a trash bin:
// free-space path loss, expected received strength, additive material
// attenuation, and advisory device-limit checks.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfwaste {

inline constexpr double kSpeedOfLightMps = 299792458.0;

/// Gains and path parameters feeding the expected-RSSI prediction.
/// Antenna gains are kept separate from system_gain_db; folding them
/// together does not reproduce measured receive levels.
struct LinkBudget {
    double tx_power_dbm = 20.0;
    double tx_antenna_gain_dbi = 2.15;
    double rx_antenna_gain_dbi = 2.15;
    double system_gain_db = -5.0;  // negative = loss
    double frequency_hz = 915e6;
    double distance_m = 1.524;
};

/// One slab of material in the propagation path. Negative attenuation is
/// allowed: confined spaces can strengthen the received signal through
/// multipath reflection.
struct MaterialLayer {
    std::string label;
    double attenuation_db = 0.0;
};

/// Free-space path loss in dB, base-10 logs, exact speed-of-light constant.
/// The constant term 20*log10(4*pi/c) is about -147.552 dB.
inline double free_space_path_loss_db(double distance_m, double frequency_hz) {
    if (!(distance_m > 0.0)) {
        throw std::domain_error("free_space_path_loss_db: distance_m must be > 0");
    }
    if (!(frequency_hz > 0.0)) {
        throw std::domain_error("free_space_path_loss_db: frequency_hz must be > 0");
    }
    constexpr double four_pi = 4.0 * std::numbers::pi;
    return 20.0 * std::log10(distance_m) + 20.0 * std::log10(frequency_hz) +
           20.0 * std::log10(four_pi / kSpeedOfLightMps);
}

/// Predicted RSSI at the receiver: tx power plus all gains, minus path loss,
/// minus the attenuation of every material layer in the path.
inline double expected_rssi_dbm(const LinkBudget& budget,
                                std::span<const MaterialLayer> layers = {}) {
    double layer_total_db = 0.0;
    for (const MaterialLayer& layer : layers) {
        layer_total_db += layer.attenuation_db;
    }
    return budget.tx_power_dbm + budget.tx_antenna_gain_dbi + budget.rx_antenna_gain_dbi +
           budget.system_gain_db -
           free_space_path_loss_db(budget.distance_m, budget.frequency_hz) - layer_total_db;
}

/// Configurable range of an RFM22B-class transceiver.
struct DeviceLimits {
    double min_tx_power_dbm = 1.0;
    double max_tx_power_dbm = 20.0;
    double min_frequency_hz = 433e6;
    double max_frequency_hz = 915e6;
};

struct ConfigViolation {
    enum class Field { tx_power, frequency };
    Field field;
    std::string message;
};

namespace detail {

inline std::string compact_number(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%g", value);
    return buffer;
}

}  // namespace detail

/// Advisory check against device limits. Violations are returned, never
/// thrown, so simulations may still explore out-of-range configurations.
/// An empty result means the configuration is within both ranges.
inline std::vector<ConfigViolation> validate_device_config(double tx_power_dbm,
                                                           double frequency_hz,
                                                           const DeviceLimits& limits = {}) {
    std::vector<ConfigViolation> violations;
    if (tx_power_dbm < limits.min_tx_power_dbm || tx_power_dbm > limits.max_tx_power_dbm) {
        violations.push_back(
            {ConfigViolation::Field::tx_power,
             "tx power " + detail::compact_number(tx_power_dbm) + " dBm outside device range [" +
                 detail::compact_number(limits.min_tx_power_dbm) + ", " +
                 detail::compact_number(limits.max_tx_power_dbm) + "] dBm"});
    }
    if (frequency_hz < limits.min_frequency_hz || frequency_hz > limits.max_frequency_hz) {
        violations.push_back(
            {ConfigViolation::Field::frequency,
             "frequency " + detail::compact_number(frequency_hz) + " Hz outside device range [" +
                 detail::compact_number(limits.min_frequency_hz) + ", " +
                 detail::compact_number(limits.max_frequency_hz) + "] Hz"});
    }
    return violations;
}

}  // namespace rfwaste

#pragma once

// Reading-session value types shared by the statistics, ingestion,
// calibration and simulator code.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rfwaste {

/// One received-strength sample. sequence_index is capture metadata only;
/// analysis never depends on reading order.
struct RssiReading {
    std::size_t sequence_index = 0;
    double rssi_dbm = 0.0;
};

enum class TxPosition { above, below };

inline const char* to_string(TxPosition position) {
    return position == TxPosition::above ? "above" : "below";
}

inline std::optional<TxPosition> tx_position_from_string(std::string_view text) {
    if (text == "above") return TxPosition::above;
    if (text == "below") return TxPosition::below;
    return std::nullopt;
}

/// Capture metadata carried in session-log headers. Empty strings and
/// unset optionals mean the field was not recorded.
struct SessionMeta {
    std::string environment;
    std::string material;
    std::optional<double> tx_power_dbm;
    std::optional<TxPosition> tx_position;
    std::optional<double> weight_lb;
    std::optional<double> fill_percent;
};

/// A timestamp-ordered list of samples plus capture metadata.
/// sequence_index is strictly increasing within a session.
struct ReadingSession {
    std::vector<RssiReading> readings;
    SessionMeta meta;
};

}  // namespace rfwaste

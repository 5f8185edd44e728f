#pragma once

// Session-level descriptive statistics: the summary quantities every
// downstream comparison is built on, plus the material-effect and
// stability measures.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "rfwaste/session.hpp"

namespace rfwaste {

struct EmptySessionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SessionSummary {
    std::size_t n = 0;
    double mean_dbm = 0.0;
    double median_dbm = 0.0;
    double std_dbm = 0.0;
    double min_dbm = 0.0;
    double max_dbm = 0.0;
};

/// Mean, median, sample standard deviation (divisor n-1, 0 when n==1),
/// min and max of a session. Median of an even count is the average of
/// the two central values.
inline SessionSummary summarize(const ReadingSession& session) {
    if (session.readings.empty()) {
        throw EmptySessionError("summarize: session has no readings");
    }

    std::vector<double> values;
    values.reserve(session.readings.size());
    for (const RssiReading& reading : session.readings) {
        values.push_back(reading.rssi_dbm);
    }
    std::sort(values.begin(), values.end());

    const std::size_t n = values.size();
    SessionSummary summary;
    summary.n = n;
    summary.min_dbm = values.front();
    summary.max_dbm = values.back();
    summary.median_dbm = (n % 2 == 1) ? values[n / 2]
                                      : 0.5 * (values[n / 2 - 1] + values[n / 2]);

    double sum = 0.0;
    for (double v : values) sum += v;
    summary.mean_dbm = sum / static_cast<double>(n);

    if (n > 1) {
        double sq = 0.0;
        for (double v : values) {
            const double d = v - summary.mean_dbm;
            sq += d * d;
        }
        summary.std_dbm = std::sqrt(sq / static_cast<double>(n - 1));
    }
    return summary;
}

/// Median RSSI with material present minus median RSSI of the empty bin.
/// Negative = attenuation; positive = multipath strengthening.
inline double material_effect_db(const SessionSummary& material, const SessionSummary& empty) {
    return material.median_dbm - empty.median_dbm;
}

/// Default threshold separating the stable behaviour seen in practice
/// (stds of 0.60-0.87 dBm) from unstable sessions, with margin.
inline constexpr double kDefaultStabilityThresholdDbm = 1.0;

struct StabilityResult {
    bool stable = false;
    double std_dbm = 0.0;
};

inline StabilityResult stability_check(const SessionSummary& summary,
                                       double threshold_dbm = kDefaultStabilityThresholdDbm) {
    if (!(threshold_dbm > 0.0)) {
        throw std::domain_error("stability_check: threshold_dbm must be > 0");
    }
    return {summary.std_dbm <= threshold_dbm, summary.std_dbm};
}

}  // namespace rfwaste

#pragma once

// Weight-to-RSSI calibration: fits the polynomial model from labeled
// sessions and inverts it to estimate unknown waste weight from an
// observed median RSSI.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "rfwaste/session.hpp"
#include "rfwaste/stats.hpp"

namespace rfwaste {

/// One labeled observation: cumulative waste weight and the median RSSI
/// recorded with that weight in the bin.
struct CalibrationPoint {
    double cumulative_weight_lb = 0.0;
    double median_rssi_dbm = 0.0;
};

/// Polynomial calibration curve, coefficients in ascending degree order
/// (c0 + c1*x + c2*x^2 + ...). empty_rssi_dbm is the model value at zero
/// weight and always equals coefficients[0].
struct CalibrationModel {
    std::vector<double> coefficients;
    double weight_min_lb = 0.0;
    double weight_max_lb = 0.0;
    double empty_rssi_dbm = 0.0;
};

struct WeightEstimate {
    double weight_lb = 0.0;
    double observed_median_dbm = 0.0;
    bool extrapolated = false;
    std::vector<double> all_roots_in_range;
};

/// Point sets up to this size are interpolated exactly; larger sets get a
/// least-squares cubic. Higher-degree interpolants oscillate.
inline constexpr std::size_t kMaxExactInterpolationPoints = 4;

/// Root scan granularity, two orders below the 0.1 lb reporting precision.
inline constexpr double kRootScanStepLb = 0.01;

namespace detail {

inline double horner(std::span<const double> coefficients, double x) {
    double value = 0.0;
    for (std::size_t i = coefficients.size(); i-- > 0;) {
        value = value * x + coefficients[i];
    }
    return value;
}

/// Newton divided differences expanded to monomial coefficients. Chosen
/// over solving the Vandermonde system for conditioning at these weight
/// scales. Returns n coefficients for n points.
inline std::vector<double> newton_interpolation(std::span<const CalibrationPoint> points) {
    const std::size_t n = points.size();
    std::vector<double> x(n), dd(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = points[i].cumulative_weight_lb;
        dd[i] = points[i].median_rssi_dbm;
    }
    for (std::size_t k = 1; k < n; ++k) {
        for (std::size_t i = n - 1; i >= k; --i) {
            dd[i] = (dd[i] - dd[i - 1]) / (x[i] - x[i - k]);
        }
    }

    // Accumulate dd[k] * prod_{j<k} (x - x[j]) in monomial form.
    std::vector<double> coefficients(n, 0.0);
    std::vector<double> basis{1.0};
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < basis.size(); ++j) {
            coefficients[j] += dd[k] * basis[j];
        }
        if (k + 1 < n) {
            basis.push_back(0.0);
            for (std::size_t j = basis.size() - 1; j > 0; --j) {
                basis[j] = basis[j - 1] - x[k] * basis[j];
            }
            basis[0] = -x[k] * basis[0];
        }
    }
    return coefficients;
}

/// Least-squares cubic via Householder QR on the Vandermonde matrix.
inline std::vector<double> least_squares_cubic(std::span<const CalibrationPoint> points) {
    constexpr std::size_t cols = 4;
    const std::size_t rows = points.size();
    std::vector<std::array<double, cols>> a(rows);
    std::vector<double> y(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const double w = points[i].cumulative_weight_lb;
        a[i] = {1.0, w, w * w, w * w * w};
        y[i] = points[i].median_rssi_dbm;
    }

    for (std::size_t k = 0; k < cols; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < rows; ++i) norm = std::hypot(norm, a[i][k]);
        if (norm == 0.0) {
            throw std::invalid_argument("least_squares_cubic: rank-deficient point set");
        }
        const double alpha = a[k][k] > 0.0 ? -norm : norm;
        std::vector<double> v(rows - k);
        v[0] = a[k][k] - alpha;
        for (std::size_t i = k + 1; i < rows; ++i) v[i - k] = a[i][k];
        double vtv = 0.0;
        for (double vi : v) vtv += vi * vi;
        if (vtv > 0.0) {
            for (std::size_t j = k; j < cols; ++j) {
                double dot = 0.0;
                for (std::size_t i = k; i < rows; ++i) dot += v[i - k] * a[i][j];
                const double f = 2.0 * dot / vtv;
                for (std::size_t i = k; i < rows; ++i) a[i][j] -= f * v[i - k];
            }
            double dot = 0.0;
            for (std::size_t i = k; i < rows; ++i) dot += v[i - k] * y[i];
            const double f = 2.0 * dot / vtv;
            for (std::size_t i = k; i < rows; ++i) y[i] -= f * v[i - k];
        }
        a[k][k] = alpha;
    }

    std::vector<double> c(cols, 0.0);
    for (std::size_t k = cols; k-- > 0;) {
        double s = y[k];
        for (std::size_t j = k + 1; j < cols; ++j) s -= a[k][j] * c[j];
        if (a[k][k] == 0.0) {
            throw std::invalid_argument("least_squares_cubic: singular system");
        }
        c[k] = s / a[k][k];
    }
    return c;
}

/// Bisect p(x) - target on [lo, hi] given a sign change; interval is
/// narrowed to 1e-9 lb, well inside the 1e-6 refinement target.
inline double bisect_root(const CalibrationModel& model, double target, double lo, double hi,
                          double g_lo) {
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        const double g_mid = horner(model.coefficients, mid) - target;
        if (g_mid == 0.0) return mid;
        if ((g_lo < 0.0) == (g_mid < 0.0)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Fits the calibration polynomial. Up to four points get the unique
/// exact interpolant; beyond that a least-squares cubic. The weight range
/// spans the smallest to the largest calibration weight.
inline CalibrationModel fit_interpolating_polynomial(std::span<const CalibrationPoint> points) {
    if (points.size() < 2) {
        throw std::invalid_argument("fit_interpolating_polynomial: need at least 2 points");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            if (points[i].cumulative_weight_lb == points[j].cumulative_weight_lb) {
                throw std::invalid_argument(
                    "fit_interpolating_polynomial: duplicate calibration weight");
            }
        }
    }

    CalibrationModel model;
    model.coefficients = points.size() <= kMaxExactInterpolationPoints
                             ? detail::newton_interpolation(points)
                             : detail::least_squares_cubic(points);
    model.weight_min_lb = points[0].cumulative_weight_lb;
    model.weight_max_lb = points[0].cumulative_weight_lb;
    for (const CalibrationPoint& p : points) {
        model.weight_min_lb = std::min(model.weight_min_lb, p.cumulative_weight_lb);
        model.weight_max_lb = std::max(model.weight_max_lb, p.cumulative_weight_lb);
    }
    model.empty_rssi_dbm = model.coefficients[0];
    return model;
}

/// Horner evaluation. Weights outside the model range are evaluated as-is;
/// flagging extrapolation is the caller's concern.
inline double evaluate_polynomial(const CalibrationModel& model, double weight_lb) {
    if (model.coefficients.empty()) {
        throw std::invalid_argument("evaluate_polynomial: model has no coefficients");
    }
    return detail::horner(model.coefficients, weight_lb);
}

/// Finds every weight in range whose model value equals the target RSSI:
/// a 0.01 lb sign-change scan refined by bisection. The smallest in-range
/// root is the estimate; attenuation makes RSSI fall with weight on the
/// physically sensible branch, and that branch owns the smallest root.
/// With no in-range root, the estimate clamps to the endpoint whose model
/// value is closest to the target and sets the extrapolated flag.
inline WeightEstimate invert_for_weight(const CalibrationModel& model, double target_rssi_dbm) {
    if (model.coefficients.empty()) {
        throw std::invalid_argument("invert_for_weight: model has no coefficients");
    }

    WeightEstimate estimate;
    estimate.observed_median_dbm = target_rssi_dbm;

    const double lo = model.weight_min_lb;
    const double hi = model.weight_max_lb;
    const auto g = [&](double x) {
        return detail::horner(model.coefficients, x) - target_rssi_dbm;
    };

    std::size_t cells = 0;
    if (hi > lo) {
        cells = static_cast<std::size_t>(std::ceil((hi - lo) / kRootScanStepLb - 1e-12));
    }
    const auto node = [&](std::size_t i) {
        return i == cells ? hi : lo + kRootScanStepLb * static_cast<double>(i);
    };

    std::vector<double>& roots = estimate.all_roots_in_range;
    bool previous_node_zero = false;
    double g_prev = g(node(0));
    if (g_prev == 0.0) {
        roots.push_back(node(0));
        previous_node_zero = true;
    }
    for (std::size_t i = 1; i <= cells; ++i) {
        const double t = node(i);
        const double g_t = g(t);
        if (g_t == 0.0) {
            // Collapse runs of exact zeros (flat model at the target) to
            // the first node of the run.
            if (!previous_node_zero) roots.push_back(t);
            previous_node_zero = true;
        } else {
            if (g_prev != 0.0 && (g_prev < 0.0) != (g_t < 0.0)) {
                roots.push_back(detail::bisect_root(model, target_rssi_dbm, node(i - 1), t, g_prev));
            }
            previous_node_zero = false;
        }
        g_prev = g_t;
    }

    if (!roots.empty()) {
        estimate.weight_lb = roots.front();
        estimate.extrapolated = false;
    } else {
        const double miss_lo = std::abs(detail::horner(model.coefficients, lo) - target_rssi_dbm);
        const double miss_hi = std::abs(detail::horner(model.coefficients, hi) - target_rssi_dbm);
        estimate.weight_lb = miss_lo <= miss_hi ? lo : hi;
        estimate.extrapolated = true;
    }
    return estimate;
}

/// Median of the session, then invert_for_weight on it.
inline WeightEstimate estimate_weight(const CalibrationModel& model,
                                      const ReadingSession& session) {
    const SessionSummary summary = summarize(session);
    return invert_for_weight(model, summary.median_dbm);
}

inline double relative_error_percent(double predicted_lb, double actual_lb) {
    if (!(actual_lb > 0.0)) {
        throw std::domain_error("relative_error_percent: actual_lb must be > 0");
    }
    return 100.0 * std::abs(predicted_lb - actual_lb) / actual_lb;
}

}  // namespace rfwaste

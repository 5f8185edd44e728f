// rfwaste: command-line front end for RSSI-based waste-weight estimation.
//
// Subcommands: linkbudget, stats, calibrate, estimate, simulate, report.
// Exit codes: 0 success, 1 data error, 2 usage error. Commands validate
// all inputs and build their output in memory before any file is written.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rfwaste/calibration.hpp"
#include "rfwaste/ingestion.hpp"
#include "rfwaste/signal_model.hpp"
#include "rfwaste/simulator.hpp"
#include "rfwaste/stats.hpp"

namespace {

// All human-facing numbers use one decimal, matching the reporting
// granularity of the measurements; data files keep full precision.
std::string fixed1(double value) {
    double rounded = std::round(value * 10.0) / 10.0;
    if (rounded == 0.0) rounded = 0.0;  // no "-0.0"
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.1f", rounded);
    return buffer;
}

std::string full_precision(double value) { return rfwaste::detail::format_double(value); }

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm parts{};
    gmtime_r(&now, &parts);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &parts);
    return buffer;
}

void print_parse_errors(const std::string& file, const std::vector<rfwaste::ParseDiagnostic>& errors) {
    for (const rfwaste::ParseDiagnostic& error : errors) {
        if (error.line > 0) {
            std::cerr << file << ":" << error.line << ": " << error.message << "\n";
        } else {
            std::cerr << file << ": " << error.message << "\n";
        }
    }
}

bool write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream output(path, std::ios::binary);
    return static_cast<bool>(output << text);
}

// ---------------------------------------------------------------------------
// linkbudget
// ---------------------------------------------------------------------------

struct LinkBudgetArgs {
    double power_dbm = 20.0;
    double frequency_hz = 915e6;
    double distance_m = 1.524;
    double antenna_gain_dbi = 2.15;
    double system_gain_db = -5.0;
};

int cmd_linkbudget(const LinkBudgetArgs& args) {
    rfwaste::LinkBudget budget;
    budget.tx_power_dbm = args.power_dbm;
    budget.tx_antenna_gain_dbi = args.antenna_gain_dbi;
    budget.rx_antenna_gain_dbi = args.antenna_gain_dbi;
    budget.system_gain_db = args.system_gain_db;
    budget.frequency_hz = args.frequency_hz;
    budget.distance_m = args.distance_m;

    double fspl = 0.0;
    double rssi = 0.0;
    try {
        fspl = rfwaste::free_space_path_loss_db(budget.distance_m, budget.frequency_hz);
        rssi = rfwaste::expected_rssi_dbm(budget);
    } catch (const std::domain_error& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    const auto violations = rfwaste::validate_device_config(budget.tx_power_dbm, budget.frequency_hz);

    std::cout << "fspl_db: " << fixed1(fspl) << "\n";
    std::cout << "expected_rssi_dbm: " << fixed1(rssi) << "\n";
    std::cout << "device_config: " << (violations.empty() ? "ok" : "out-of-range") << "\n";
    for (const rfwaste::ConfigViolation& violation : violations) {
        std::cout << "warning: " << violation.message << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

struct StatsArgs {
    std::vector<std::string> files;
    std::string empty_file;
    double threshold_dbm = rfwaste::kDefaultStabilityThresholdDbm;
};

int cmd_stats(const StatsArgs& args) {
    std::optional<rfwaste::SessionSummary> empty_summary;
    bool failed = false;

    if (!args.empty_file.empty()) {
        const auto parsed = rfwaste::parse_session_log_file(args.empty_file);
        if (!parsed.ok()) {
            print_parse_errors(args.empty_file, parsed.errors);
            failed = true;
        } else {
            empty_summary = rfwaste::summarize(parsed.session);
        }
    }

    struct Row {
        std::string file;
        rfwaste::SessionSummary summary;
    };
    std::vector<Row> rows;
    for (const std::string& file : args.files) {
        const auto parsed = rfwaste::parse_session_log_file(file);
        if (!parsed.ok()) {
            print_parse_errors(file, parsed.errors);
            failed = true;
            continue;
        }
        rows.push_back({file, rfwaste::summarize(parsed.session)});
    }
    if (failed) return 1;

    std::size_t width = 4;
    for (const Row& row : rows) width = std::max(width, row.file.size());

    std::printf("%-*s  %5s  %8s  %8s  %7s  %-9s", static_cast<int>(width), "file", "n", "mean",
                "median", "std", "stability");
    if (empty_summary) std::printf("  %9s", "effect_db");
    std::printf("\n");
    for (const Row& row : rows) {
        const auto verdict = rfwaste::stability_check(row.summary, args.threshold_dbm);
        std::printf("%-*s  %5zu  %8s  %8s  %7s  %-9s", static_cast<int>(width), row.file.c_str(),
                    row.summary.n, fixed1(row.summary.mean_dbm).c_str(),
                    fixed1(row.summary.median_dbm).c_str(), fixed1(row.summary.std_dbm).c_str(),
                    verdict.stable ? "stable" : "unstable");
        if (empty_summary) {
            std::printf("  %9s",
                        fixed1(rfwaste::material_effect_db(row.summary, *empty_summary)).c_str());
        }
        std::printf("\n");
    }
    return 0;
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

struct CalibrateArgs {
    std::vector<std::string> files;
    std::string out_file;
    double frequency_hz = 915e6;
};

int cmd_calibrate(const CalibrateArgs& args) {
    std::vector<rfwaste::CalibrationPoint> points;
    rfwaste::DeviceConfig device;
    device.frequency_hz = args.frequency_hz;
    bool device_power_set = false;
    bool device_position_set = false;
    bool failed = false;

    for (const std::string& file : args.files) {
        const auto parsed = rfwaste::parse_session_log_file(file);
        if (!parsed.ok()) {
            print_parse_errors(file, parsed.errors);
            failed = true;
            continue;
        }
        if (!parsed.session.meta.weight_lb) {
            std::cerr << file << ": missing `# weight_lb = ...` header required for calibration\n";
            failed = true;
            continue;
        }
        const auto summary = rfwaste::summarize(parsed.session);
        points.push_back({*parsed.session.meta.weight_lb, summary.median_dbm});
        if (!device_power_set && parsed.session.meta.tx_power_dbm) {
            device.tx_power_dbm = *parsed.session.meta.tx_power_dbm;
            device_power_set = true;
        }
        if (!device_position_set && parsed.session.meta.tx_position) {
            device.tx_position = *parsed.session.meta.tx_position;
            device_position_set = true;
        }
    }
    if (failed) return 1;

    std::sort(points.begin(), points.end(),
              [](const rfwaste::CalibrationPoint& a, const rfwaste::CalibrationPoint& b) {
                  return a.cumulative_weight_lb < b.cumulative_weight_lb;
              });

    rfwaste::CalibrationProfile profile;
    try {
        profile.model = rfwaste::fit_interpolating_polynomial(points);
    } catch (const std::invalid_argument& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    profile.created_at = utc_timestamp();
    profile.device = device;
    profile.points = points;

    try {
        rfwaste::save_profile(profile, args.out_file);
    } catch (const rfwaste::ProfileError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }

    std::cout << "points: " << points.size() << "\n";
    std::cout << "degree: " << profile.model.coefficients.size() - 1 << "\n";
    std::cout << "coefficients:";
    for (double c : profile.model.coefficients) std::cout << " " << full_precision(c);
    std::cout << "\n";
    std::cout << "profile: " << args.out_file << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

struct EstimateArgs {
    std::string profile_file;
    std::string session_file;
    std::optional<double> actual_lb;
};

int cmd_estimate(const EstimateArgs& args) {
    rfwaste::CalibrationProfile profile;
    try {
        profile = rfwaste::load_profile(args.profile_file);
    } catch (const rfwaste::ProfileError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    for (const std::string& warning : rfwaste::check_profile_consistency(profile)) {
        std::cerr << "warning: " << warning << "\n";
    }

    const auto parsed = rfwaste::parse_session_log_file(args.session_file);
    if (!parsed.ok()) {
        print_parse_errors(args.session_file, parsed.errors);
        return 1;
    }

    const rfwaste::WeightEstimate estimate =
        rfwaste::estimate_weight(profile.model, parsed.session);
    std::optional<double> error_percent;
    if (args.actual_lb) {
        try {
            error_percent = rfwaste::relative_error_percent(estimate.weight_lb, *args.actual_lb);
        } catch (const std::domain_error& error) {
            std::cerr << "error: " << error.what() << "\n";
            return 1;
        }
    }

    std::cout << "estimated_weight_lb: " << fixed1(estimate.weight_lb) << "\n";
    std::cout << "observed_median_dbm: " << fixed1(estimate.observed_median_dbm) << "\n";
    std::cout << "extrapolated: " << (estimate.extrapolated ? "yes" : "no") << "\n";
    if (error_percent) {
        std::cout << "relative_error_percent: " << fixed1(*error_percent) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string scenario_file;
    std::size_t n_readings = rfwaste::kDefaultReadingsPerSession;
    std::string out_file;
};

int cmd_simulate(const SimulateArgs& args) {
    std::string text;
    try {
        const rfwaste::Scenario scenario = rfwaste::load_scenario(args.scenario_file);
        text = rfwaste::format_session_log(rfwaste::simulate_session(scenario, args.n_readings));
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }

    if (args.out_file.empty()) {
        std::cout << text;
        return 0;
    }
    if (!write_text_file(args.out_file, text)) {
        std::cerr << "error: cannot write session log to " << args.out_file << "\n";
        return 1;
    }
    std::cout << "wrote " << args.n_readings << " readings to " << args.out_file << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportArgs {
    std::string profile_file;
    std::vector<std::string> files;
    std::string out_file;
};

std::string render_chart(const rfwaste::CalibrationModel& model,
                         const std::vector<std::pair<double, double>>& observed) {
    constexpr int kWidth = 48;
    constexpr int kHeight = 16;
    const double w_min = model.weight_min_lb;
    const double w_max = model.weight_max_lb;
    const double w_span = w_max > w_min ? w_max - w_min : 1.0;

    std::vector<double> curve(kWidth);
    double v_min = rfwaste::evaluate_polynomial(model, w_min);
    double v_max = v_min;
    for (int c = 0; c < kWidth; ++c) {
        const double w = w_min + (c + 0.5) * w_span / kWidth;
        curve[c] = rfwaste::evaluate_polynomial(model, w);
        v_min = std::min(v_min, curve[c]);
        v_max = std::max(v_max, curve[c]);
    }
    for (const auto& [weight, median] : observed) {
        v_min = std::min(v_min, median);
        v_max = std::max(v_max, median);
    }
    if (v_max == v_min) {
        v_max += 0.5;
        v_min -= 0.5;
    }

    std::vector<std::string> grid(kHeight, std::string(kWidth, ' '));
    const auto to_row = [&](double v) {
        const int row = static_cast<int>(std::lround((v_max - v) / (v_max - v_min) * (kHeight - 1)));
        return std::clamp(row, 0, kHeight - 1);
    };
    for (int c = 0; c < kWidth; ++c) grid[to_row(curve[c])][c] = '*';
    for (const auto& [weight, median] : observed) {
        const int col = static_cast<int>(
            std::lround((weight - w_min) / w_span * (kWidth - 1)));
        grid[to_row(median)][std::clamp(col, 0, kWidth - 1)] = 'o';
    }

    std::string chart = "calibration curve: weight " + fixed1(w_min) + ".." + fixed1(w_max) +
                        " lb, rssi " + fixed1(v_min) + ".." + fixed1(v_max) +
                        " dBm  (*: model, o: observed)\n";
    for (int r = 0; r < kHeight; ++r) {
        char label[16] = "        ";
        if (r == 0) std::snprintf(label, sizeof label, "%7s ", fixed1(v_max).c_str());
        if (r == kHeight - 1) std::snprintf(label, sizeof label, "%7s ", fixed1(v_min).c_str());
        chart += label;
        chart += "|" + grid[r] + "\n";
    }
    chart += "        +" + std::string(kWidth, '-') + "\n";
    char axis[80];
    std::snprintf(axis, sizeof axis, "         %-*s%s\n", kWidth - 6, fixed1(w_min).c_str(),
                  fixed1(w_max).c_str());
    chart += axis;
    return chart;
}

int cmd_report(const ReportArgs& args) {
    rfwaste::CalibrationProfile profile;
    try {
        profile = rfwaste::load_profile(args.profile_file);
    } catch (const rfwaste::ProfileError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }

    std::vector<std::pair<double, double>> observed;
    bool failed = false;
    for (const std::string& file : args.files) {
        const auto parsed = rfwaste::parse_session_log_file(file);
        if (!parsed.ok()) {
            print_parse_errors(file, parsed.errors);
            failed = true;
            continue;
        }
        if (!parsed.session.meta.weight_lb) {
            std::cerr << file << ": missing `# weight_lb = ...` header required for the report\n";
            failed = true;
            continue;
        }
        observed.emplace_back(*parsed.session.meta.weight_lb,
                              rfwaste::summarize(parsed.session).median_dbm);
    }
    if (failed) return 1;

    std::string csv = "# columns: weight_lb,median_rssi_dbm\n";
    for (const auto& [weight, median] : observed) {
        csv += full_precision(weight) + "," + full_precision(median) + "\n";
    }
    const std::string chart = render_chart(profile.model, observed);

    if (!args.out_file.empty()) {
        if (!write_text_file(args.out_file, csv)) {
            std::cerr << "error: cannot write CSV to " << args.out_file << "\n";
            return 1;
        }
        std::cout << chart;
        std::cout << "csv: " << args.out_file << "\n";
    } else {
        std::cout << csv;
        std::cout << chart;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RSSI-based food-waste weight estimation"};
    app.require_subcommand(1);

    LinkBudgetArgs linkbudget_args;
    CLI::App* linkbudget = app.add_subcommand(
        "linkbudget", "Path loss, expected RSSI and device-limit check for a link budget");
    linkbudget->add_option("--power", linkbudget_args.power_dbm, "Transmit power, dBm");
    linkbudget->add_option("--freq", linkbudget_args.frequency_hz, "Carrier frequency, Hz");
    linkbudget->add_option("--dist", linkbudget_args.distance_m, "Antenna separation, m");
    linkbudget->add_option("--ant-gain", linkbudget_args.antenna_gain_dbi,
                           "Gain of each antenna, dBi");
    linkbudget->add_option("--sys-gain", linkbudget_args.system_gain_db,
                           "System gain, dB (negative = loss)");

    StatsArgs stats_args;
    CLI::App* stats = app.add_subcommand("stats", "Summarize session logs");
    stats->add_option("files", stats_args.files, "Session log files")->required();
    stats->add_option("--empty", stats_args.empty_file,
                      "Empty-bin baseline log; adds a material-effect column");
    stats->add_option("--threshold", stats_args.threshold_dbm, "Stability threshold, dBm")
        ->check(CLI::PositiveNumber);

    CalibrateArgs calibrate_args;
    CLI::App* calibrate =
        app.add_subcommand("calibrate", "Fit a calibration model from weight-labeled logs");
    calibrate->add_option("files", calibrate_args.files, "Session logs with weight_lb headers")
        ->required()
        ->expected(2, -1);
    calibrate->add_option("--out", calibrate_args.out_file, "Profile destination")->required();
    calibrate->add_option("--freq", calibrate_args.frequency_hz,
                          "Carrier frequency recorded in the profile, Hz");

    EstimateArgs estimate_args;
    double actual_lb = 0.0;
    CLI::App* estimate =
        app.add_subcommand("estimate", "Estimate waste weight from a session log");
    estimate->add_option("file", estimate_args.session_file, "Session log")->required();
    estimate->add_option("--profile", estimate_args.profile_file, "Calibration profile")
        ->required();
    CLI::Option* actual_option =
        estimate->add_option("--actual", actual_lb, "Known weight for error reporting, lb");

    SimulateArgs simulate_args;
    CLI::App* simulate = app.add_subcommand("simulate", "Generate a session log from a scenario");
    simulate->add_option("--scenario", simulate_args.scenario_file, "Scenario file")->required();
    simulate->add_option("--n", simulate_args.n_readings, "Readings per session")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--out", simulate_args.out_file,
                         "Session log destination (stdout when omitted)");

    ReportArgs report_args;
    CLI::App* report =
        app.add_subcommand("report", "Calibration-curve chart and CSV of observed points");
    report->add_option("files", report_args.files, "Session logs with weight_lb headers")
        ->required();
    report->add_option("--profile", report_args.profile_file, "Calibration profile")->required();
    report->add_option("--out", report_args.out_file, "CSV destination (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        const int code = app.exit(error);
        return code == 0 ? 0 : 2;
    }

    if (actual_option->count() > 0) estimate_args.actual_lb = actual_lb;

    try {
        if (app.got_subcommand(linkbudget)) return cmd_linkbudget(linkbudget_args);
        if (app.got_subcommand(stats)) return cmd_stats(stats_args);
        if (app.got_subcommand(calibrate)) return cmd_calibrate(calibrate_args);
        if (app.got_subcommand(estimate)) return cmd_estimate(estimate_args);
        if (app.got_subcommand(simulate)) return cmd_simulate(simulate_args);
        if (app.got_subcommand(report)) return cmd_report(report_args);
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    return 2;
}

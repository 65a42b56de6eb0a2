#pragma once

// Summary metrics of one run and the side-by-side comparison of two runs.
// Reports depend only on the scenario and on the columns stored in the
// trajectory CSV, so re-extracting from a saved file gives the same report.

#include "ringpbc/scenario.hpp"
#include "ringpbc/sim.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ringpbc {

/// Band for the settling metric, relative to the target voltage.
inline constexpr double kSettlingBand = 0.02;
/// Leading fraction of the run treated as the transient window.
inline constexpr double kTransientFraction = 0.2;
/// Start of the error-energy decay fit [s].
inline constexpr double kDecayFitStart = 10e-3;

struct ConverterReport {
    double final_vC = 0.0;
    double final_iL = 0.0;
    double final_iT = 0.0;
    /// First time after which vC stays within the band; empty if it never
    /// settles or the target varies in time.
    std::optional<double> settling_time;
    double peak_vC = 0.0;
    double final_hd = 0.0;
    double rms_tracking_error = 0.0;

    bool operator==(const ConverterReport&) const = default;
};

struct RunReport {
    std::string scenario;
    std::string control;
    std::string mode;
    Index converters = 0;
    bool tracking = false;  // time-varying reference
    bool ok = true;
    std::string failure;
    double t_end = 0.0;
    std::size_t samples = 0;

    std::vector<ConverterReport> per_converter;
    std::optional<double> settling_time;  // slowest converter
    double peak_vC = 0.0;
    double final_hd_total = 0.0;
    /// Least-squares rate of ln Hd_total from 10 ms onward [1/s].
    std::optional<double> hd_decay_rate;
    long saturation_count = 0;  // feedback samples with some duty at 0 or 1
    /// Over the last 5 reference cycles for a sinusoid, else the last 10% of the run.
    double rms_tracking_error = 0.0;

    /// Mean of vC_n iT_n over the transient window, per link [W].
    std::vector<double> link_average_power;
    /// Sum over links of the mean power times the link orientation toward the
    /// nearest minimum-load converter (+1 toward, -1 away, 0 equidistant).
    double oriented_flow_score = 0.0;
    double transient_max_abs_iT = 0.0;
    double final_max_abs_iT = 0.0;

    bool operator==(const RunReport&) const = default;
};

[[nodiscard]] RunReport extract_report(const Scenario& scenario, const Trajectory& traj);

/// +1 when line n carries power toward the closest minimum-R2T converter,
/// -1 when it points away, 0 when both ends are equally far.
[[nodiscard]] std::vector<int> link_orientation(const RingParams& params);

[[nodiscard]] nlohmann::json report_to_json(const RunReport& r);
[[nodiscard]] RunReport report_from_json(const nlohmann::json& j);
void write_report_text(std::ostream& os, const RunReport& r);

struct ComparisonRow {
    std::string metric;
    std::optional<double> a;
    std::optional<double> b;
    std::optional<double> delta;  // b - a when both exist
    std::optional<bool> pass;     // set for the improvement claims only
};

struct Comparison {
    std::string label_a;
    std::string label_b;
    std::vector<ComparisonRow> rows;
};

/// Settling time passes when b < a (a missing value counts as infinite);
/// peak vC passes when b <= a. Throws std::invalid_argument when the two
/// runs have different converter counts.
[[nodiscard]] Comparison compare_reports(const RunReport& a, const RunReport& b);
void write_comparison_text(std::ostream& os, const Comparison& c);

}  // namespace ringpbc

#include "ringpbc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace ringpbc {

using nlohmann::json;

namespace {

constexpr double kTrackingCycles = 5.0;
constexpr double kSteadyFraction = 0.1;
constexpr double kDecayFloorRatio = 1e-12;

std::optional<double> settling_time(const Trajectory& traj, Index n, double target) {
    const double band = kSettlingBand * std::abs(target);
    std::optional<std::size_t> last_out;
    for (std::size_t k = 0; k < traj.samples(); ++k) {
        if (std::abs(traj.states[k].vC(n) - target) > band) last_out = k;
    }
    if (!last_out) return traj.t.front();
    if (*last_out + 1 >= traj.samples()) return std::nullopt;
    return traj.t[*last_out + 1];
}

std::optional<double> decay_rate_fit(const Trajectory& traj) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t count = 0;
    double floor = 0.0;
    for (std::size_t k = 0; k < traj.samples(); ++k) {
        if (traj.t[k] < kDecayFitStart) continue;
        const double h = traj.hd_total[k];
        if (count == 0) floor = std::max(h * kDecayFloorRatio, std::numeric_limits<double>::min());
        if (!(h > floor)) break;
        const double x = traj.t[k];
        const double y = std::log(h);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 3) return std::nullopt;
    const double c = static_cast<double>(count);
    const double denom = c * sxx - sx * sx;
    if (!(denom > 0.0)) return std::nullopt;
    return -(c * sxy - sx * sy) / denom;
}

/// Trapezoid mean of f(k) over samples with t <= t_stop.
template <class F>
double window_mean(const Trajectory& traj, double t_stop, F&& f) {
    double integral = 0.0;
    double span = 0.0;
    for (std::size_t k = 0; k + 1 < traj.samples() && traj.t[k + 1] <= t_stop; ++k) {
        const double h = traj.t[k + 1] - traj.t[k];
        integral += 0.5 * h * (f(k) + f(k + 1));
        span += h;
    }
    return span > 0.0 ? integral / span : (traj.samples() > 0 ? f(0) : 0.0);
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

std::string format_optional(const std::optional<double>& v, const char* fmt = "%.6g") {
    if (!v) return "n/a";
    char buf[48];
    std::snprintf(buf, sizeof buf, fmt, *v);
    return buf;
}

std::string format(double v, const char* fmt = "%.6g") { return format_optional(v, fmt); }

}  // namespace

std::vector<int> link_orientation(const RingParams& params) {
    const Index m = params.size();
    double r_min = std::numeric_limits<double>::infinity();
    for (const auto& c : params.converters) r_min = std::min(r_min, c.R2T);
    std::vector<Index> dist(static_cast<std::size_t>(m), m);
    for (Index n = 0; n < m; ++n) {
        for (Index j = 0; j < m; ++j) {
            if (params.converters[static_cast<std::size_t>(j)].R2T != r_min) continue;
            const Index d = std::abs(n - j);
            dist[static_cast<std::size_t>(n)] = std::min(dist[static_cast<std::size_t>(n)], std::min(d, m - d));
        }
    }
    std::vector<int> out(static_cast<std::size_t>(m));
    for (Index n = 0; n < m; ++n) {
        const Index here = dist[static_cast<std::size_t>(n)];
        const Index there = dist[static_cast<std::size_t>(next_index(n, m))];
        out[static_cast<std::size_t>(n)] = there < here ? 1 : (there > here ? -1 : 0);
    }
    return out;
}

RunReport extract_report(const Scenario& scenario, const Trajectory& traj) {
    const Index m = scenario.size();
    if (traj.converters != m) throw std::invalid_argument("trajectory and scenario disagree on converter count");
    if (traj.samples() == 0) throw std::invalid_argument("trajectory has no samples");

    RunReport r;
    r.scenario = scenario.name;
    r.control = std::string(to_string(scenario.control));
    r.mode = std::string(to_string(scenario.mode));
    r.converters = m;
    r.tracking = is_time_varying(scenario.reference);
    r.ok = traj.ok;
    r.failure = traj.failure;
    r.t_end = traj.t.back();
    r.samples = traj.samples();

    const std::size_t last = traj.samples() - 1;
    const double freq = reference_frequency(scenario.reference);
    const double rms_start = r.tracking && freq > 0.0 ? r.t_end - kTrackingCycles / freq
                                                      : r.t_end * (1.0 - kSteadyFraction);
    double sq_total = 0.0;
    std::size_t n_total = 0;

    for (Index n = 0; n < m; ++n) {
        ConverterReport c;
        const auto& xf = traj.states[last];
        c.final_vC = xf.vC(n);
        c.final_iL = xf.iL(n);
        c.final_iT = xf.iT(n);
        c.final_hd = traj.hd[last][static_cast<std::size_t>(n)];
        c.peak_vC = -std::numeric_limits<double>::infinity();
        double sq = 0.0;
        std::size_t cnt = 0;
        for (std::size_t k = 0; k < traj.samples(); ++k) {
            const double v = traj.states[k].vC(n);
            c.peak_vC = std::max(c.peak_vC, v);
            if (traj.t[k] >= rms_start) {
                const double err = v - target_voltage(scenario, n, traj.t[k]);
                sq += err * err;
                ++cnt;
            }
        }
        c.rms_tracking_error = cnt > 0 ? std::sqrt(sq / static_cast<double>(cnt)) : 0.0;
        sq_total += sq;
        n_total += cnt;
        if (!r.tracking) c.settling_time = settling_time(traj, n, target_voltage(scenario, n, 0.0));
        r.per_converter.push_back(c);
    }

    r.peak_vC = -std::numeric_limits<double>::infinity();
    for (const auto& c : r.per_converter) r.peak_vC = std::max(r.peak_vC, c.peak_vC);
    if (!r.tracking) {
        r.settling_time = 0.0;
        for (const auto& c : r.per_converter) {
            if (!c.settling_time) {
                r.settling_time.reset();
                break;
            }
            r.settling_time = std::max(*r.settling_time, *c.settling_time);
        }
    }
    r.rms_tracking_error = n_total > 0 ? std::sqrt(sq_total / static_cast<double>(n_total)) : 0.0;
    r.final_hd_total = traj.hd_total[last];
    r.hd_decay_rate = decay_rate_fit(traj);

    if (scenario.control == ControlMode::Pbc) {
        for (const auto& mu : traj.duties) {
            const auto v = mu.values();
            if (std::any_of(v.begin(), v.end(), [](double d) { return d <= 0.0 || d >= 1.0; })) {
                ++r.saturation_count;
            }
        }
    }

    const double t_window = traj.t.front() + kTransientFraction * (r.t_end - traj.t.front());
    const auto orientation = link_orientation(scenario.params);
    for (Index n = 0; n < m; ++n) {
        const double p = window_mean(traj, t_window, [&](std::size_t k) {
            return traj.states[k].vC(n) * traj.states[k].iT(n);
        });
        r.link_average_power.push_back(p);
        r.oriented_flow_score += p * orientation[static_cast<std::size_t>(n)];
        for (std::size_t k = 0; k < traj.samples() && traj.t[k] <= t_window; ++k) {
            r.transient_max_abs_iT = std::max(r.transient_max_abs_iT, std::abs(traj.states[k].iT(n)));
        }
        r.final_max_abs_iT = std::max(r.final_max_abs_iT, std::abs(traj.states[last].iT(n)));
    }
    return r;
}

json report_to_json(const RunReport& r) {
    json conv = json::array();
    for (const auto& c : r.per_converter) {
        conv.push_back({{"final_vC", c.final_vC},
                        {"final_iL", c.final_iL},
                        {"final_iT", c.final_iT},
                        {"settling_time", optional_json(c.settling_time)},
                        {"peak_vC", c.peak_vC},
                        {"final_hd", c.final_hd},
                        {"rms_tracking_error", c.rms_tracking_error}});
    }
    return {{"scenario", r.scenario},
            {"control", r.control},
            {"mode", r.mode},
            {"converters", r.converters},
            {"tracking", r.tracking},
            {"ok", r.ok},
            {"failure", r.failure},
            {"t_end", r.t_end},
            {"samples", r.samples},
            {"per_converter", conv},
            {"settling_time", optional_json(r.settling_time)},
            {"peak_vC", r.peak_vC},
            {"final_hd_total", r.final_hd_total},
            {"hd_decay_rate", optional_json(r.hd_decay_rate)},
            {"saturation_count", r.saturation_count},
            {"rms_tracking_error", r.rms_tracking_error},
            {"link_average_power", r.link_average_power},
            {"oriented_flow_score", r.oriented_flow_score},
            {"transient_max_abs_iT", r.transient_max_abs_iT},
            {"final_max_abs_iT", r.final_max_abs_iT}};
}

RunReport report_from_json(const json& j) {
    try {
        RunReport r;
        r.scenario = j.at("scenario").get<std::string>();
        r.control = j.at("control").get<std::string>();
        r.mode = j.at("mode").get<std::string>();
        r.converters = j.at("converters").get<Index>();
        r.tracking = j.at("tracking").get<bool>();
        r.ok = j.at("ok").get<bool>();
        r.failure = j.at("failure").get<std::string>();
        r.t_end = j.at("t_end").get<double>();
        r.samples = j.at("samples").get<std::size_t>();
        for (const auto& c : j.at("per_converter")) {
            ConverterReport cr;
            cr.final_vC = c.at("final_vC").get<double>();
            cr.final_iL = c.at("final_iL").get<double>();
            cr.final_iT = c.at("final_iT").get<double>();
            cr.settling_time = optional_from(c, "settling_time");
            cr.peak_vC = c.at("peak_vC").get<double>();
            cr.final_hd = c.at("final_hd").get<double>();
            cr.rms_tracking_error = c.at("rms_tracking_error").get<double>();
            r.per_converter.push_back(cr);
        }
        r.settling_time = optional_from(j, "settling_time");
        r.peak_vC = j.at("peak_vC").get<double>();
        r.final_hd_total = j.at("final_hd_total").get<double>();
        r.hd_decay_rate = optional_from(j, "hd_decay_rate");
        r.saturation_count = j.at("saturation_count").get<long>();
        r.rms_tracking_error = j.at("rms_tracking_error").get<double>();
        r.link_average_power = j.at("link_average_power").get<std::vector<double>>();
        r.oriented_flow_score = j.at("oriented_flow_score").get<double>();
        r.transient_max_abs_iT = j.at("transient_max_abs_iT").get<double>();
        r.final_max_abs_iT = j.at("final_max_abs_iT").get<double>();
        if (static_cast<Index>(r.per_converter.size()) != r.converters) {
            throw std::invalid_argument("per_converter length does not match converters");
        }
        return r;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed report: ") + e.what());
    }
}

void write_report_text(std::ostream& os, const RunReport& r) {
    char buf[160];
    os << "scenario   " << r.scenario << '\n'
       << "control    " << r.control << '\n'
       << "mode       " << r.mode << '\n'
       << "status     " << (r.ok ? "ok" : "FAILED: " + r.failure) << '\n'
       << "t_end      " << format(r.t_end) << " s (" << r.samples << " samples)\n\n";
    std::snprintf(buf, sizeof buf, "%-4s %12s %12s %12s %12s %12s %12s %12s\n", "n", "final_vC", "final_iL",
                  "final_iT", "settling_s", "peak_vC", "final_Hd", "rms_err");
    os << buf;
    for (std::size_t n = 0; n < r.per_converter.size(); ++n) {
        const auto& c = r.per_converter[n];
        std::snprintf(buf, sizeof buf, "%-4zu %12.6g %12.6g %12.4e %12s %12.6g %12.4e %12.4e\n", n, c.final_vC,
                      c.final_iL, c.final_iT, format_optional(c.settling_time).c_str(), c.peak_vC, c.final_hd,
                      c.rms_tracking_error);
        os << buf;
    }
    os << '\n';
    const auto line = [&](const char* name, const std::string& value) {
        std::snprintf(buf, sizeof buf, "%-22s %s\n", name, value.c_str());
        os << buf;
    };
    line("settling_time_s", format_optional(r.settling_time));
    line("peak_vC_V", format(r.peak_vC));
    line("final_Hd_total_J", format(r.final_hd_total, "%.4e"));
    line("Hd_decay_rate_1/s", format_optional(r.hd_decay_rate));
    line("saturation_count", std::to_string(r.saturation_count));
    line("rms_tracking_error_V", format(r.rms_tracking_error, "%.4e"));
    line("transient_max_abs_iT", format(r.transient_max_abs_iT, "%.4e"));
    line("final_max_abs_iT", format(r.final_max_abs_iT, "%.4e"));
    line("oriented_flow_score_W", format(r.oriented_flow_score, "%.4e"));
    std::string powers;
    for (double p : r.link_average_power) powers += (powers.empty() ? "" : " ") + format(p, "%.4e");
    line("link_average_power_W", powers);
}

Comparison compare_reports(const RunReport& a, const RunReport& b) {
    if (a.converters != b.converters) {
        throw std::invalid_argument("topology mismatch: " + std::to_string(a.converters) + " vs " +
                                    std::to_string(b.converters) + " converters");
    }
    Comparison c;
    c.label_a = a.scenario + " (" + a.control + ")";
    c.label_b = b.scenario + " (" + b.control + ")";
    const auto add = [&](std::string name, std::optional<double> va, std::optional<double> vb,
                         std::optional<bool> pass = std::nullopt) {
        ComparisonRow row{std::move(name), va, vb, std::nullopt, pass};
        if (va && vb) row.delta = *vb - *va;
        c.rows.push_back(std::move(row));
    };

    std::optional<bool> settling_pass;
    if (!a.tracking && !b.tracking) {
        const double inf = std::numeric_limits<double>::infinity();
        settling_pass = b.settling_time.value_or(inf) < a.settling_time.value_or(inf);
    }
    add("settling_time_s", a.settling_time, b.settling_time, settling_pass);
    add("peak_vC_V", a.peak_vC, b.peak_vC, b.peak_vC <= a.peak_vC);
    add("final_Hd_total_J", a.final_hd_total, b.final_hd_total);
    add("Hd_decay_rate_1/s", a.hd_decay_rate, b.hd_decay_rate);
    add("saturation_count", static_cast<double>(a.saturation_count), static_cast<double>(b.saturation_count));
    add("rms_tracking_error_V", a.rms_tracking_error, b.rms_tracking_error);
    add("transient_max_abs_iT", a.transient_max_abs_iT, b.transient_max_abs_iT);
    add("oriented_flow_score_W", a.oriented_flow_score, b.oriented_flow_score);
    for (std::size_t n = 0; n < a.per_converter.size(); ++n) {
        const auto& ca = a.per_converter[n];
        const auto& cb = b.per_converter[n];
        const std::string s = "[" + std::to_string(n) + "]";
        add("final_vC" + s, ca.final_vC, cb.final_vC);
        add("final_iL" + s, ca.final_iL, cb.final_iL);
        add("final_iT" + s, ca.final_iT, cb.final_iT);
        add("settling_time" + s, ca.settling_time, cb.settling_time);
        add("peak_vC" + s, ca.peak_vC, cb.peak_vC);
        add("final_Hd" + s, ca.final_hd, cb.final_hd);
    }
    return c;
}

void write_comparison_text(std::ostream& os, const Comparison& c) {
    char buf[200];
    os << "a: " << c.label_a << '\n' << "b: " << c.label_b << "\n\n";
    std::snprintf(buf, sizeof buf, "%-24s %14s %14s %14s  %s\n", "metric", "a", "b", "b - a", "flag");
    os << buf;
    for (const auto& row : c.rows) {
        const char* flag = !row.pass ? "" : (*row.pass ? "PASS" : "FAIL");
        std::snprintf(buf, sizeof buf, "%-24s %14s %14s %14s  %s\n", row.metric.c_str(),
                      format_optional(row.a).c_str(), format_optional(row.b).c_str(),
                      format_optional(row.delta).c_str(), flag);
        os << buf;
    }
}

}  // namespace ringpbc

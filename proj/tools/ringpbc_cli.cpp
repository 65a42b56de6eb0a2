// Command-line front end: run scenarios, compare reports, sample zero-dynamics
// phase lines and cross-check the integrators.

#include "ringpbc/cross_validate.hpp"
#include "ringpbc/equilibrium.hpp"
#include "ringpbc/report.hpp"
#include "ringpbc/scenario.hpp"
#include "ringpbc/sim.hpp"
#include "ringpbc/trajectory_io.hpp"
#include "ringpbc/zero_dynamics.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace ringpbc;

namespace {

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream is(p);
    if (!is) throw std::runtime_error("cannot open " + p.string());
    nlohmann::json j;
    is >> j;
    return j;
}

RunReport load_report(const std::string& where) {
    fs::path p(where);
    if (fs::is_directory(p)) p /= "report.json";
    return report_from_json(read_json(p));
}

struct RunOptions {
    std::string scenario;
    std::string out;
    std::string mode;
    bool no_control = false;
    std::optional<double> t_end;
    std::optional<std::uint64_t> seed;
    std::string method;
};

int cmd_run(const RunOptions& o) {
    Scenario s = load_scenario(o.scenario);
    if (o.no_control) s.control = ControlMode::OpenLoop;
    if (o.t_end) s.integrator.t_end = *o.t_end;
    if (!o.method.empty()) s.integrator.method = parse_integrator_method(o.method);
    if (o.mode == "switched") {
        s.mode = SimMode::Switched;
        s.integrator.dt = std::min(s.integrator.dt, 1.0 / (50.0 * s.pwm.f_sw));
    } else if (o.mode == "averaged") {
        s.mode = SimMode::Averaged;
    }
    if (o.seed) {
        if (s.x0.kind != InitialState::Kind::Random) s.x0 = InitialState{InitialState::Kind::Random, {}, 1.0, 0};
        s.x0.seed = *o.seed;
    }
    s.validate();

    const fs::path out = o.out.empty() ? fs::path("runs") / s.name : fs::path(o.out);
    fs::create_directories(out);
    open_out(out / "scenario.json") << scenario_to_json(s).dump(2) << '\n';

    const Trajectory traj = run_job(make_job(s));
    {
        auto os = open_out(out / "trajectory.csv");
        write_trajectory_csv(os, traj);
    }
    {
        auto os = open_out(out / "events.log");
        write_event_log(os, traj.events);
    }
    if (s.mode == SimMode::Switched) {
        auto os = open_out(out / "period_average.csv");
        write_period_average_csv(os, traj);
    }
    if (traj.samples() == 0) {
        std::cerr << "run failed before the first sample: " << traj.failure << '\n';
        return 1;
    }
    const RunReport report = extract_report(s, traj);
    {
        auto os = open_out(out / "report.txt");
        write_report_text(os, report);
    }
    open_out(out / "report.json") << report_to_json(report).dump(2) << '\n';
    write_report_text(std::cout, report);
    std::cout << "\nwrote " << out.string() << '\n';
    if (!traj.ok) {
        std::cerr << "integration failed: " << traj.failure << '\n';
        return 1;
    }
    return 0;
}

int cmd_report(const std::string& dir) {
    const fs::path d(dir);
    const Scenario s = scenario_from_json(read_json(d / "scenario.json"));
    std::ifstream is(d / "trajectory.csv");
    if (!is) throw std::runtime_error("cannot open " + (d / "trajectory.csv").string());
    write_report_text(std::cout, extract_report(s, read_trajectory_csv(is)));
    return 0;
}

int cmd_phase_line(const std::string& output, const std::string& params, Index converter, int grid,
                   const std::string& out) {
    const Scenario s = load_scenario(params);
    std::vector<double> targets;
    for (Index n = 0; n < s.size(); ++n) targets.push_back(target_voltage(s, n, 0.0));
    const Equilibrium eq = steady_state_for_voltages(s.params, targets);
    const ZeroDynConfig cfg = ZeroDynConfig::from_equilibrium(s.params, eq, converter);
    PinnedOutput which;
    if (output == "voltage") {
        which = PinnedOutput::Voltage;
    } else if (output == "current") {
        which = PinnedOutput::Current;
    } else {
        throw std::invalid_argument("phase-line output must be 'voltage' or 'current'");
    }
    const PhaseLine line = phase_line(cfg, which, grid);
    if (out.empty()) {
        write_phase_line_csv(std::cout, line);
    } else {
        auto os = open_out(out);
        write_phase_line_csv(os, line);
        for (const auto& e : line.equilibria) {
            std::printf("equilibrium mu=%.10f slope=%.6g %s\n", e.mu, e.slope,
                        std::string(to_string(e.stability)).c_str());
        }
    }
    if (which == PinnedOutput::Current) {
        std::printf("# closed-form roots:");
        for (const auto& e : equilibria_current_output(cfg)) {
            std::printf(" %.10f(%s%s)", e.mu, std::string(to_string(e.stability)).c_str(),
                        e.admissible ? "" : ", outside [0,1]");
        }
        std::printf("\n");
    }
    return 0;
}

int cmd_cross_validate(const std::string& name, const std::vector<double>& dts, std::optional<double> t_end) {
    Scenario s = load_scenario(name);
    if (t_end) s.integrator.t_end = *t_end;
    const auto rep = cross_validate(make_job(s), dts);
    std::printf("%-12s %18s %22s\n", "dt", "max|rk4-rk45|", "max|rk4(i)-rk4(i+1)|");
    for (std::size_t i = 0; i < rep.dts.size(); ++i) {
        char succ[32] = "";
        if (i < rep.deviation_successive.size()) std::snprintf(succ, sizeof succ, "%.6e", rep.deviation_successive[i]);
        std::printf("%-12.4g %18.6e %22s\n", rep.dts[i], rep.deviation_vs_rk45[i], succ);
    }
    if (rep.order_estimate) std::printf("rk4 order estimate: %.3f\n", *rep.order_estimate);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ring of boost converters under passivity-based control"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write trajectory and report files");
    run_cmd->add_option("scenario", run.scenario, "Built-in name or scenario JSON file")->required();
    run_cmd->add_option("--out", run.out, "Output directory (default runs/<name>)");
    run_cmd->add_option("--mode", run.mode, "averaged or switched")->check(CLI::IsMember({"averaged", "switched"}));
    run_cmd->add_flag("--no-control", run.no_control, "Open loop with U = 1 - E / vCd");
    run_cmd->add_option("--t-end", run.t_end, "Simulated time [s]")->check(CLI::PositiveNumber);
    run_cmd->add_option("--seed", run.seed, "Start from a seeded random perturbation of the equilibrium");
    run_cmd->add_option("--method", run.method, "rk4 or rk45")->check(CLI::IsMember({"rk4", "rk45"}));

    app.add_subcommand("list-scenarios", "List the built-in scenarios");

    std::string cmp_a, cmp_b;
    auto* cmp_cmd = app.add_subcommand("compare", "Compare two reports (report.json or run directory)");
    cmp_cmd->add_option("a", cmp_a)->required();
    cmp_cmd->add_option("b", cmp_b)->required();

    std::string pl_output, pl_params = "balanced", pl_out;
    Index pl_converter = 0;
    int pl_grid = 2001;
    auto* pl_cmd = app.add_subcommand("phase-line", "Sample the zero dynamics of one converter");
    pl_cmd->add_option("output", pl_output, "voltage or current")->required()->check(CLI::IsMember({"voltage", "current"}));
    pl_cmd->add_option("--params", pl_params, "Scenario supplying parameters and the operating point");
    pl_cmd->add_option("--converter", pl_converter, "Converter index")->check(CLI::NonNegativeNumber);
    pl_cmd->add_option("--grid", pl_grid, "Number of samples in (0,1)")->check(CLI::Range(3, 10000000));
    pl_cmd->add_option("--out", pl_out, "CSV file (default stdout)");

    std::string rep_dir;
    auto* rep_cmd = app.add_subcommand("report", "Rebuild the report of a run directory from its files");
    rep_cmd->add_option("run_dir", rep_dir)->required();

    std::string cv_name;
    std::vector<double> cv_dts{1e-5, 5e-6, 2.5e-6};
    std::optional<double> cv_t_end;
    auto* cv_cmd = app.add_subcommand("cross-validate", "Compare RK4 at several steps against RK45");
    cv_cmd->add_option("scenario", cv_name)->required();
    cv_cmd->add_option("--dt", cv_dts, "RK4 step sizes")->check(CLI::PositiveNumber);
    cv_cmd->add_option("--t-end", cv_t_end)->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return cmd_run(run);
        if (app.got_subcommand("list-scenarios")) {
            for (const auto& name : builtin_scenario_names()) {
                std::printf("%-24s %s\n", name.c_str(), builtin_scenario(name).description.c_str());
            }
            return 0;
        }
        if (*cmp_cmd) {
            write_comparison_text(std::cout, compare_reports(load_report(cmp_a), load_report(cmp_b)));
            return 0;
        }
        if (*pl_cmd) return cmd_phase_line(pl_output, pl_params, pl_converter, pl_grid, pl_out);
        if (*rep_cmd) return cmd_report(rep_dir);
        if (*cv_cmd) return cmd_cross_validate(cv_name, cv_dts, cv_t_end);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

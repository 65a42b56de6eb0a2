// Serial vs OpenMP timing for the two data-parallel kernels: a batch of
// independent scenario runs and dense zero-dynamics phase-line sampling.
// Each parallel result is checked for bit-identity against the serial one.

#include "ringpbc/batch.hpp"
#include "ringpbc/equilibrium.hpp"
#include "ringpbc/scenario.hpp"
#include "ringpbc/zero_dynamics.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

using namespace ringpbc;

namespace {

double seconds(const std::function<void()>& fn, int repeats) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

bool identical(const std::vector<Trajectory>& a, const std::vector<Trajectory>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].t != b[i].t || a[i].hd_total != b[i].hd_total) return false;
        for (std::size_t k = 0; k < a[i].samples(); ++k) {
            if (a[i].states[k].vector() != b[i].states[k].vector()) return false;
        }
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Serial vs parallel kernel timing"};
    int jobs = 16;
    double t_end = 0.2;
    int grid = 2'000'000;
    int repeats = 3;
    app.add_option("--jobs", jobs, "Independent runs in the batch")->check(CLI::PositiveNumber);
    app.add_option("--t-end", t_end, "Simulated time per run [s]")->check(CLI::PositiveNumber);
    app.add_option("--grid", grid, "Phase-line samples")->check(CLI::Range(3, 100'000'000));
    app.add_option("--repeats", repeats, "Timing repetitions (best is reported)")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    std::printf("threads available: %d\n", parallel_thread_count());

    const auto names = builtin_scenario_names();
    std::vector<SimulationJob> batch;
    for (int i = 0; i < jobs; ++i) {
        Scenario s = builtin_scenario(names[static_cast<std::size_t>(i) % names.size()]);
        s.integrator.t_end = t_end;
        s.x0 = InitialState{InitialState::Kind::Random, {}, 1.0, static_cast<std::uint64_t>(i)};
        batch.push_back(make_job(s));
    }
    std::vector<Trajectory> serial, parallel;
    const double t_serial = seconds([&] { serial = run_batch_serial(batch); }, repeats);
    const double t_parallel = seconds([&] { parallel = run_batch(batch, Execution::Parallel); }, repeats);
    const bool batch_same = identical(serial, parallel);
    std::printf("batch       %3d runs   serial %9.4f s   parallel %9.4f s   speedup %5.2f   identical %s\n", jobs,
                t_serial, t_parallel, t_serial / t_parallel, batch_same ? "yes" : "NO");

    const Scenario bal = builtin_scenario("balanced");
    const Equilibrium eq = steady_state_for_voltages(bal.params, std::vector<double>(5, 40.0));
    const ZeroDynConfig cfg = ZeroDynConfig::from_equilibrium(bal.params, eq, 0);
    PhaseLine ps, pp;
    const double l_serial = seconds([&] { ps = phase_line(cfg, PinnedOutput::Current, grid, Execution::Serial); }, repeats);
    const double l_parallel =
        seconds([&] { pp = phase_line(cfg, PinnedOutput::Current, grid, Execution::Parallel); }, repeats);
    const bool line_same = ps.mu == pp.mu && ps.mu_dot == pp.mu_dot;
    std::printf("phase-line  %9d pts serial %9.4f s   parallel %9.4f s   speedup %5.2f   identical %s\n", grid,
                l_serial, l_parallel, l_serial / l_parallel, line_same ? "yes" : "NO");

    return batch_same && line_same ? 0 : 1;
}

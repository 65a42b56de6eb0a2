#include "ringpbc/cross_validate.hpp"

#include "ringpbc/batch.hpp"

#include <cmath>
#include <stdexcept>

namespace ringpbc {

double max_state_deviation(const Trajectory& a, const Trajectory& b) {
    if (a.samples() != b.samples()) {
        throw std::invalid_argument("trajectories have different sample counts");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.samples(); ++i) {
        if (std::abs(a.t[i] - b.t[i]) > 1e-12 * std::max(1.0, std::abs(a.t[i]))) {
            throw std::invalid_argument("trajectories are sampled at different times");
        }
        worst = std::max(worst, (a.states[i].vector() - b.states[i].vector()).cwiseAbs().maxCoeff());
    }
    return worst;
}

CrossValidationReport cross_validate(const SimulationJob& job, std::span<const double> dt_list,
                                     Execution exec) {
    if (dt_list.empty()) throw std::invalid_argument("cross validation needs at least one RK4 step size");
    if (job.pwm) throw std::invalid_argument("cross validation compares averaged-mode runs");

    std::vector<SimulationJob> jobs;
    for (double dt : dt_list) {
        SimulationJob j = job;
        j.integrator.method = IntegratorMethod::Rk4;
        j.integrator.dt = dt;
        jobs.push_back(std::move(j));
    }
    SimulationJob reference = job;
    reference.integrator.method = IntegratorMethod::Rk45;
    jobs.push_back(std::move(reference));

    const auto runs = run_batch(jobs, exec);
    for (const auto& r : runs) {
        if (!r.ok) throw std::runtime_error("cross validation run failed: " + r.failure);
    }

    CrossValidationReport rep;
    rep.dts.assign(dt_list.begin(), dt_list.end());
    const Trajectory& rk45 = runs.back();
    for (std::size_t i = 0; i < dt_list.size(); ++i) {
        rep.deviation_vs_rk45.push_back(max_state_deviation(runs[i], rk45));
        if (i + 1 < dt_list.size()) rep.deviation_successive.push_back(max_state_deviation(runs[i], runs[i + 1]));
    }
    if (rep.deviation_successive.size() >= 2 && rep.deviation_successive[1] > 0.0) {
        rep.order_estimate = std::log(rep.deviation_successive[0] / rep.deviation_successive[1]) /
                             std::log(rep.dts[0] / rep.dts[1]);
    }
    return rep;
}

}  // namespace ringpbc

#include "ringpbc/sim.hpp"

#include "ringpbc/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ringpbc {

namespace {

// Augmented state z = [x (3m), vCd (m), iTd (m)]. The controller slots only
// move under feedback; for open-loop laws they stay at their initial values.
class ClosedLoop {
public:
    ClosedLoop(const RingParams& params, const DutyLaw& law) : params_(params), law_(law) {
        params_.validate();
        m_ = params_.size();
        std::visit([this](const auto& l) { init(l); }, law_);
    }

    [[nodiscard]] Index m() const { return m_; }
    [[nodiscard]] Index dim() const { return 5 * m_; }

    [[nodiscard]] Eigen::VectorXd initial(const RingState& x0) const {
        if (x0.vector().size() != kSlotsPerConverter * m_) {
            throw std::invalid_argument("initial state length does not match ring size");
        }
        Eigen::VectorXd z(dim());
        z.head(kSlotsPerConverter * m_) = x0.vector();
        for (Index n = 0; n < m_; ++n) {
            z[kSlotsPerConverter * m_ + n] = base_.vCd[static_cast<std::size_t>(n)];
            z[4 * m_ + n] = base_.iTd[static_cast<std::size_t>(n)];
        }
        return z;
    }

    [[nodiscard]] RingState plant(const Eigen::VectorXd& z) const {
        return RingState(Eigen::VectorXd(z.head(kSlotsPerConverter * m_)));
    }

    /// Desired trajectory at (t, z) as seen by the duty law.
    [[nodiscard]] ControllerState controller(double t, const Eigen::VectorXd& z) const {
        if (const auto* pbc = std::get_if<PassivityControl>(&law_)) {
            ControllerState c = base_;
            for (Index n = 0; n < m_; ++n) {
                c.vCd[static_cast<std::size_t>(n)] = z[kSlotsPerConverter * m_ + n];
                c.iTd[static_cast<std::size_t>(n)] = z[4 * m_ + n];
            }
            return effective_controller(params_, c, pbc->reference, t, pbc->voltage_mode);
        }
        if (const auto* ol = std::get_if<OpenLoopReference>(&law_)) {
            if (!is_time_varying(ol->reference)) return base_;
            return initial_for_targets(ol->reference, t);
        }
        return base_;
    }

    /// Duty before clamping (feedback) or the open-loop duty itself.
    [[nodiscard]] std::vector<double> raw_duty(double t, const Eigen::VectorXd& z) const {
        if (const auto* pbc = std::get_if<PassivityControl>(&law_)) {
            return pbc_duty_unclamped(params_, plant(z), controller(t, z), pbc->damping);
        }
        if (const auto* ol = std::get_if<OpenLoopReference>(&law_)) {
            const auto u = feedforward_duty(params_, ol->reference, t);
            return {u.values().begin(), u.values().end()};
        }
        const auto& c = std::get<ConstantDuty>(law_);
        return {c.duty.values().begin(), c.duty.values().end()};
    }

    [[nodiscard]] DutyVector duty(double t, const Eigen::VectorXd& z) const {
        auto mu = raw_duty(t, z);
        for (double& v : mu) v = std::clamp(v, 0.0, 1.0);
        return DutyVector(std::move(mu));
    }

    /// dz with the plant driven by `switches` and the desired dynamics by `mu`.
    void rhs(double t, const Eigen::VectorXd& z, const DutyVector& switches, const DutyVector& mu,
             Eigen::VectorXd& dz) const {
        dz.resize(dim());
        const RingState dx = averaged_derivative(params_, plant(z), switches);
        dz.head(kSlotsPerConverter * m_) = dx.vector();
        dz.tail(2 * m_).setZero();
        if (const auto* pbc = std::get_if<PassivityControl>(&law_)) {
            ControllerState c = base_;
            for (Index n = 0; n < m_; ++n) {
                c.vCd[static_cast<std::size_t>(n)] = z[kSlotsPerConverter * m_ + n];
                c.iTd[static_cast<std::size_t>(n)] = z[4 * m_ + n];
            }
            const auto rate = desired_state_derivative(params_, c, mu, pbc->reference, t, pbc->voltage_mode);
            for (Index n = 0; n < m_; ++n) {
                dz[kSlotsPerConverter * m_ + n] = rate.vCd[static_cast<std::size_t>(n)];
                dz[4 * m_ + n] = rate.iTd[static_cast<std::size_t>(n)];
            }
        }
    }

    void averaged_rhs(double t, const Eigen::VectorXd& z, Eigen::VectorXd& dz) const {
        const DutyVector mu = duty(t, z);
        rhs(t, z, mu, mu, dz);
    }

    void record(Trajectory& traj, double t, const Eigen::VectorXd& z) const {
        const RingState x = plant(z);
        const ControllerState c = controller(t, z);
        const ErrorEnergy hd = error_energy(params_, x, c);
        traj.t.push_back(t);
        traj.states.push_back(x);
        traj.duties.push_back(duty(t, z));
        traj.hd.push_back(hd.per_converter);
        traj.hd_total.push_back(hd.total);
        traj.desired.push_back(c.desired_state());
        if (const auto* pbc = std::get_if<PassivityControl>(&law_)) {
            traj.hd_rate.push_back(error_energy_rate(params_, x, c, pbc->damping));
        } else {
            traj.hd_rate.push_back(0.0);
        }
    }

    /// Per converter: -1 clamped at 0, +1 clamped at 1, 0 inside [0,1].
    [[nodiscard]] std::vector<int> saturation(double t, const Eigen::VectorXd& z) const {
        const auto mu = raw_duty(t, z);
        std::vector<int> out(mu.size());
        for (std::size_t k = 0; k < mu.size(); ++k) out[k] = mu[k] < 0.0 ? -1 : (mu[k] > 1.0 ? 1 : 0);
        return out;
    }

    /// Logs transitions into and out of duty saturation.
    void watch_saturation(Trajectory& traj, double t, const Eigen::VectorXd& z) {
        if (!is_feedback(law_)) return;
        const auto mu = raw_duty(t, z);
        const auto sat = saturation(t, z);
        for (Index n = 0; n < m_; ++n) {
            const auto k = static_cast<std::size_t>(n);
            const int state = sat[k];
            if (state == saturation_[k]) continue;
            SimEvent ev;
            ev.t = t;
            ev.converter = n;
            if (state != 0) {
                ev.kind = EventKind::DutySaturated;
                std::ostringstream os;
                os << "duty clamped " << (state < 0 ? "at 0" : "at 1") << " (unclamped " << mu[k] << ")";
                ev.detail = os.str();
            } else {
                ev.kind = EventKind::DutyReleased;
                ev.detail = "duty back inside [0,1]";
            }
            traj.events.push_back(std::move(ev));
            saturation_[k] = state;
        }
    }

private:
    void init(const ConstantDuty& c) {
        if (c.duty.size() != m_) throw std::invalid_argument("constant duty length does not match ring size");
        c.duty.validate();
        bool has_equilibrium = true;
        for (Index n = 0; n < m_; ++n) has_equilibrium = has_equilibrium && c.duty[n] < 1.0;
        if (has_equilibrium) {
            const Equilibrium eq = steady_state(params_, c.duty);
            base_ = ControllerState{eq.vC_bar, eq.iT_bar, eq.iL_bar};
        } else {
            // No steady state exists; energies are then measured from the origin.
            const auto zeros = std::vector<double>(static_cast<std::size_t>(m_), 0.0);
            base_ = ControllerState{zeros, zeros, zeros};
        }
        saturation_.assign(static_cast<std::size_t>(m_), 0);
    }

    void init(const OpenLoopReference& ol) {
        validate_reference(ol.reference, params_);
        base_ = initial_controller_state(params_, ol.reference);
        saturation_.assign(static_cast<std::size_t>(m_), 0);
    }

    void init(const PassivityControl& pbc) {
        validate_reference(pbc.reference, params_);
        pbc.damping.validate(m_);
        base_ = initial_controller_state(params_, pbc.reference);
        saturation_.assign(static_cast<std::size_t>(m_), 0);
    }

    [[nodiscard]] ControllerState initial_for_targets(const Reference& ref, double t) const {
        std::vector<double> v(static_cast<std::size_t>(m_));
        for (Index n = 0; n < m_; ++n) v[static_cast<std::size_t>(n)] = reference_voltage(ref, n, t);
        const Equilibrium eq = steady_state_for_voltages(params_, v);
        return ControllerState{eq.vC_bar, eq.iT_bar, eq.iL_bar};
    }

    RingParams params_;
    DutyLaw law_;
    Index m_ = 0;
    ControllerState base_;
    std::vector<int> saturation_;
};

void mark_failure(Trajectory& traj, double t, const std::string& message) {
    traj.ok = false;
    traj.failure = message;
    traj.events.push_back(SimEvent{t, EventKind::Failure, -1, message});
}

}  // namespace

bool is_feedback(const DutyLaw& law) { return std::holds_alternative<PassivityControl>(law); }

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::DutySaturated: return "duty_saturated";
        case EventKind::DutyReleased: return "duty_released";
        case EventKind::StepRejected: return "step_rejected";
        case EventKind::Failure: return "failure";
    }
    return "?";
}

void PwmConfig::validate(Index m, double reference_frequency) const {
    if (!(std::isfinite(f_sw) && f_sw > 0.0)) {
        throw std::invalid_argument("switching frequency must be positive");
    }
    if (!phase.empty() && static_cast<Index>(phase.size()) != m) {
        throw std::invalid_argument("carrier phase list length does not match ring size");
    }
    for (double p : phase) {
        if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("carrier phase must lie in [0,1)");
    }
    if (f_sw < 100.0 * reference_frequency) {
        throw std::invalid_argument("switching frequency must be at least 100x the reference frequency");
    }
}

Trajectory simulate_averaged(const RingParams& params, const RingState& x0, const DutyLaw& law,
                             const IntegratorConfig& integrator) {
    ClosedLoop loop(params, law);
    Trajectory traj;
    traj.converters = loop.m();

    const Rhs f = [&loop](double t, const Eigen::VectorXd& z, Eigen::VectorXd& dz) {
        loop.averaged_rhs(t, z, dz);
    };
    ModeSignature mode;
    if (is_feedback(law)) {
        mode = [&loop](double t, const Eigen::VectorXd& z) { return loop.saturation(t, z); };
    }
    const Eigen::VectorXd z0 = loop.initial(x0);
    loop.watch_saturation(traj, 0.0, z0);
    const auto res = integrate(
        f, z0, integrator, [&](double t, const Eigen::VectorXd& z) { loop.record(traj, t, z); },
        [&](double t, const Eigen::VectorXd& z) { loop.watch_saturation(traj, t, z); }, mode);

    traj.steps_accepted = res.steps_accepted;
    traj.steps_rejected = res.steps_rejected;
    for (double t : res.rejection_times) {
        traj.events.push_back(SimEvent{t, EventKind::StepRejected, -1, "error estimate above tolerance"});
    }
    std::stable_sort(traj.events.begin(), traj.events.end(),
                     [](const SimEvent& a, const SimEvent& b) { return a.t < b.t; });
    if (!res.ok) mark_failure(traj, res.t_reached, res.message);
    return traj;
}

Trajectory simulate_switched(const RingParams& params, const RingState& x0, const DutyLaw& law,
                             const PwmConfig& pwm, const IntegratorConfig& integrator) {
    integrator.validate();
    ClosedLoop loop(params, law);
    const Index m = loop.m();
    double ref_freq = 0.0;
    if (const auto* ol = std::get_if<OpenLoopReference>(&law)) ref_freq = reference_frequency(ol->reference);
    if (const auto* pbc = std::get_if<PassivityControl>(&law)) ref_freq = reference_frequency(pbc->reference);
    pwm.validate(m, ref_freq);

    const double period = 1.0 / pwm.f_sw;
    if (integrator.dt > period / 50.0 * (1.0 + 1e-12)) {
        throw std::invalid_argument("switched simulation needs dt <= 1/(50 f_sw)");
    }
    const double eps = 1e-9 * period;
    auto phase_of = [&](Index n) { return pwm.phase.empty() ? 0.0 : pwm.phase[static_cast<std::size_t>(n)]; };

    Trajectory traj;
    traj.converters = m;
    Eigen::VectorXd z = loop.initial(x0);
    const Index nx = kSlotsPerConverter * m;

    DutyVector mu = loop.duty(0.0, z);
    std::vector<long> latched_period(static_cast<std::size_t>(m));
    for (Index n = 0; n < m; ++n) {
        latched_period[static_cast<std::size_t>(n)] = static_cast<long>(std::floor(phase_of(n) + eps * pwm.f_sw));
    }
    loop.watch_saturation(traj, 0.0, z);

    Eigen::VectorXd period_sum = Eigen::VectorXd::Zero(nx);
    RingState last_average = x0;
    long global_period = 0;

    const auto times = output_times(integrator);
    std::size_t next_out = 1;
    loop.record(traj, 0.0, z);
    traj.period_average.push_back(last_average);

    DutyVector switches(m, 0.0);
    double t = 0.0;
    while (next_out < times.size()) {
        // Sample the duty at each carrier reset.
        for (Index n = 0; n < m; ++n) {
            const auto k = static_cast<long>(std::floor(pwm.f_sw * t + phase_of(n) + eps * pwm.f_sw));
            if (k != latched_period[static_cast<std::size_t>(n)]) {
                latched_period[static_cast<std::size_t>(n)] = k;
                mu[n] = loop.duty(t, z)[n];
            }
        }

        // Next breakpoint: step limit, output time, averaging window end, switch edges.
        double t_next = std::min(t + integrator.dt, times[next_out]);
        t_next = std::min(t_next, static_cast<double>(global_period + 1) * period);
        for (Index n = 0; n < m; ++n) {
            const double k = static_cast<double>(latched_period[static_cast<std::size_t>(n)]);
            const double off_edge = (k + mu[n] - phase_of(n)) * period;
            const double reset = (k + 1.0 - phase_of(n)) * period;
            if (off_edge > t + eps) t_next = std::min(t_next, off_edge);
            t_next = std::min(t_next, reset);
        }
        const double h = t_next - t;
        if (!(h > 0.0)) throw std::logic_error("switched integration failed to advance");
        const double mid = t + 0.5 * h;
        for (Index n = 0; n < m; ++n) {
            const double p = pwm.f_sw * mid + phase_of(n);
            switches[n] = (p - std::floor(p)) < mu[n] ? 1.0 : 0.0;
        }

        const Rhs f = [&](double tt, const Eigen::VectorXd& zz, Eigen::VectorXd& dz) {
            loop.rhs(tt, zz, switches, mu, dz);
        };
        Eigen::VectorXd z_new = rk4_step(f, t, z, h);
        ++traj.steps_accepted;
        if (!z_new.allFinite()) {
            std::ostringstream os;
            os.precision(10);
            os << "non-finite state at t = " << t_next << " s";
            mark_failure(traj, t, os.str());
            return traj;
        }
        period_sum += 0.5 * h * (z.head(nx) + z_new.head(nx));
        z.swap(z_new);
        t = t_next;
        loop.watch_saturation(traj, t, z);

        if (t >= static_cast<double>(global_period + 1) * period - eps) {
            last_average = RingState(Eigen::VectorXd(period_sum / period));
            period_sum.setZero();
            ++global_period;
        }
        if (t >= times[next_out] - eps) {
            t = times[next_out];
            loop.record(traj, t, z);
            // The recorded duty is the latched modulating signal, not the instantaneous law.
            traj.duties.back() = mu;
            traj.period_average.push_back(last_average);
            ++next_out;
        }
    }
    return traj;
}

Trajectory run_job(const SimulationJob& job) {
    if (job.pwm) return simulate_switched(job.params, job.x0, job.law, *job.pwm, job.integrator);
    return simulate_averaged(job.params, job.x0, job.law, job.integrator);
}

}  // namespace ringpbc

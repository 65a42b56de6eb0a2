#include "ringpbc/control.hpp"

#include "ringpbc/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ringpbc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::vector<double> targets_at(const RingParams& params, const Reference& ref, double t) {
    std::vector<double> v(static_cast<std::size_t>(params.size()));
    for (Index n = 0; n < params.size(); ++n) v[static_cast<std::size_t>(n)] = reference_voltage(ref, n, t);
    return v;
}

}  // namespace

DampingConfig DampingConfig::uniform(Index m, double r_alpha) {
    return DampingConfig{std::vector<double>(static_cast<std::size_t>(m), r_alpha)};
}

void DampingConfig::validate(Index m) const {
    if (static_cast<Index>(R_alpha.size()) != m) {
        throw std::invalid_argument("damping has " + std::to_string(R_alpha.size()) +
                                    " entries, expected " + std::to_string(m));
    }
    for (double r : R_alpha) {
        if (!(std::isfinite(r) && r >= 0.0)) {
            throw std::invalid_argument("R_alpha must be finite and non-negative");
        }
    }
}

Eigen::VectorXd DampingConfig::injection_diagonal() const {
    const auto m = static_cast<Index>(R_alpha.size());
    Eigen::VectorXd d = Eigen::VectorXd::Zero(kSlotsPerConverter * m);
    for (Index n = 0; n < m; ++n) d[kSlotsPerConverter * n + kSlotIL] = R_alpha[static_cast<std::size_t>(n)];
    return d;
}

double reference_voltage(const Reference& ref, Index n, double t) {
    return std::visit(overloaded{
                          [&](const ConstantReference& c) { return c.vCd.at(static_cast<std::size_t>(n)); },
                          [&](const SinusoidReference& s) {
                              return s.vDC + s.A * std::sin(2.0 * std::numbers::pi * s.f * t);
                          },
                      },
                      ref);
}

double reference_rate(const Reference& ref, Index /*n*/, double t) {
    return std::visit(overloaded{
                          [](const ConstantReference&) { return 0.0; },
                          [&](const SinusoidReference& s) {
                              const double w = 2.0 * std::numbers::pi * s.f;
                              return s.A * w * std::cos(w * t);
                          },
                      },
                      ref);
}

bool is_time_varying(const Reference& ref) { return std::holds_alternative<SinusoidReference>(ref); }

double reference_frequency(const Reference& ref) {
    if (const auto* s = std::get_if<SinusoidReference>(&ref)) return s->f;
    return 0.0;
}

void validate_reference(const Reference& ref, const RingParams& params) {
    double e_max = 0.0;
    for (const auto& c : params.converters) e_max = std::max(e_max, c.E);

    if (const auto* c = std::get_if<ConstantReference>(&ref)) {
        if (static_cast<Index>(c->vCd.size()) != params.size()) {
            throw std::invalid_argument("reference has " + std::to_string(c->vCd.size()) +
                                        " targets, expected " + std::to_string(params.size()));
        }
        for (std::size_t n = 0; n < c->vCd.size(); ++n) {
            if (!(c->vCd[n] > params.converters[n].E)) {
                throw std::invalid_argument("reference vCd[" + std::to_string(n) + "] = " +
                                            std::to_string(c->vCd[n]) +
                                            " V is not above the source voltage");
            }
        }
        return;
    }
    const auto& s = std::get<SinusoidReference>(ref);
    if (!(std::isfinite(s.vDC) && std::isfinite(s.A) && s.A >= 0.0)) {
        throw std::invalid_argument("sinusoid reference needs finite vDC and A >= 0");
    }
    if (!(std::isfinite(s.f) && s.f > 0.0)) {
        throw std::invalid_argument("sinusoid reference frequency must be positive");
    }
    if (!(s.vDC - s.A > e_max)) {
        throw std::invalid_argument("sinusoid reference dips to " + std::to_string(s.vDC - s.A) +
                                    " V, not above the largest source voltage");
    }
}

RingState ControllerState::desired_state() const {
    const Index m = size();
    RingState x(m);
    for (Index n = 0; n < m; ++n) {
        const auto k = static_cast<std::size_t>(n);
        x.iL(n) = iL_bar[k];
        x.vC(n) = vCd[k];
        x.iT(n) = iTd[k];
    }
    return x;
}

ControllerState initial_controller_state(const RingParams& params, const Reference& ref) {
    const Equilibrium eq = steady_state_for_voltages(params, targets_at(params, ref, 0.0));
    ControllerState ctrl;
    ctrl.vCd = eq.vC_bar;
    ctrl.iTd = eq.iT_bar;
    ctrl.iL_bar = eq.iL_bar;
    return ctrl;
}

ControllerState effective_controller(const RingParams& params, const ControllerState& ctrl,
                                     const Reference& ref, double t, DesiredVoltageMode mode) {
    if (!is_time_varying(ref)) return ctrl;
    ControllerState out = ctrl;
    const auto targets = targets_at(params, ref, t);
    out.iL_bar = steady_state_for_voltages(params, targets).iL_bar;
    if (mode == DesiredVoltageMode::Override) out.vCd = targets;
    return out;
}

DutyVector feedforward_duty(const RingParams& params, const Reference& ref, double t) {
    DutyVector u(params.size(), 0.0);
    for (Index n = 0; n < params.size(); ++n) {
        u[n] = duty_from_voltage(params.converters[static_cast<std::size_t>(n)].E,
                                 reference_voltage(ref, n, t));
    }
    return u;
}

std::vector<double> pbc_duty_unclamped(const RingParams& params, const RingState& state,
                                       const ControllerState& ctrl, const DampingConfig& damping) {
    const Index m = params.size();
    std::vector<double> mu(static_cast<std::size_t>(m));
    for (Index n = 0; n < m; ++n) {
        const auto k = static_cast<std::size_t>(n);
        const double vcd = ctrl.vCd[k];
        if (!(vcd > 0.0)) {
            throw std::runtime_error("controller state corrupted: vCd[" + std::to_string(n) +
                                     "] = " + std::to_string(vcd));
        }
        const double bracket = params.converters[k].E + damping.R_alpha[k] * (state.iL(n) - ctrl.iL_bar[k]);
        mu[k] = 1.0 - bracket / vcd;
    }
    return mu;
}

DutyVector pbc_duty(const RingParams& params, const RingState& state, const ControllerState& ctrl,
                    const DampingConfig& damping) {
    auto mu = pbc_duty_unclamped(params, state, ctrl, damping);
    for (double& v : mu) v = std::clamp(v, 0.0, 1.0);
    return DutyVector(std::move(mu));
}

ControllerRate desired_state_derivative(const RingParams& params, const ControllerState& ctrl,
                                        const DutyVector& duty, const Reference& ref, double t,
                                        DesiredVoltageMode mode) {
    const Index m = params.size();
    const ControllerState c = effective_controller(params, ctrl, ref, t, mode);
    ControllerRate rate;
    rate.vCd.resize(static_cast<std::size_t>(m));
    rate.iTd.resize(static_cast<std::size_t>(m));
    const bool override_voltage = is_time_varying(ref) && mode == DesiredVoltageMode::Override;
    for (Index n = 0; n < m; ++n) {
        const auto k = static_cast<std::size_t>(n);
        const auto kp = static_cast<std::size_t>(prev_index(n, m));
        const auto kn = static_cast<std::size_t>(next_index(n, m));
        const auto& cv = params.converters[k];
        const auto& ln = params.lines[k];
        if (override_voltage) {
            rate.vCd[k] = reference_rate(ref, n, t);
        } else {
            rate.vCd[k] = ((1.0 - duty[n]) * c.iL_bar[k] - c.iTd[k] + c.iTd[kp] - c.vCd[k] / cv.R2T) / cv.C;
        }
        rate.iTd[k] = (c.vCd[k] - c.vCd[kn] - ln.R1T * c.iTd[k]) / ln.LT;
    }
    return rate;
}

ErrorEnergy error_energy(const RingParams& params, const RingState& state, const ControllerState& ctrl) {
    const Index m = params.size();
    ErrorEnergy out;
    out.error = state.vector() - ctrl.desired_state().vector();
    out.per_converter.resize(static_cast<std::size_t>(m));
    for (Index n = 0; n < m; ++n) {
        const auto k = static_cast<std::size_t>(n);
        const Index b = kSlotsPerConverter * n;
        const double eil = out.error[b + kSlotIL];
        const double evc = out.error[b + kSlotVC];
        const double eit = out.error[b + kSlotIT];
        out.per_converter[k] = 0.5 * (params.converters[k].L * eil * eil +
                                      params.converters[k].C * evc * evc +
                                      params.lines[k].LT * eit * eit);
        out.total += out.per_converter[k];
    }
    return out;
}

double error_energy_rate(const RingParams& params, const RingState& state,
                         const ControllerState& ctrl, const DampingConfig& damping) {
    const Eigen::VectorXd e = state.vector() - ctrl.desired_state().vector();
    const Eigen::VectorXd r = dissipation_diagonal(params) + damping.injection_diagonal();
    return -e.cwiseAbs2().dot(r);
}

double decay_rate_bound(const RingParams& params, const DampingConfig& damping) {
    const Eigen::VectorXd r = dissipation_diagonal(params) + damping.injection_diagonal();
    return r.cwiseQuotient(storage_diagonal(params)).minCoeff();
}

}  // namespace ringpbc

#include "ringpbc/equilibrium.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ringpbc {

RingState Equilibrium::state() const {
    const auto m = static_cast<Index>(vC_bar.size());
    RingState x(m);
    for (Index n = 0; n < m; ++n) {
        const auto k = static_cast<std::size_t>(n);
        x.iL(n) = iL_bar[k];
        x.vC(n) = vC_bar[k];
        x.iT(n) = iT_bar[k];
    }
    return x;
}

double duty_from_voltage(double E, double vCd) {
    if (!(std::isfinite(vCd) && vCd > 0.0)) {
        throw std::invalid_argument("target voltage must be positive, got " + std::to_string(vCd));
    }
    if (!(std::isfinite(E) && E > 0.0)) {
        throw std::invalid_argument("source voltage must be positive, got " + std::to_string(E));
    }
    if (vCd < E) {
        throw std::domain_error("target " + std::to_string(vCd) + " V is below the source " +
                                std::to_string(E) + " V; a boost stage only steps up");
    }
    return 1.0 - E / vCd;
}

Equilibrium steady_state(const RingParams& params, const DutyVector& duty) {
    const Index m = params.size();
    if (duty.size() != m) {
        throw std::invalid_argument("duty vector length does not match ring size");
    }
    Equilibrium eq;
    eq.duty = duty;
    eq.iL_bar.resize(static_cast<std::size_t>(m));
    eq.vC_bar.resize(static_cast<std::size_t>(m));
    eq.iT_bar.resize(static_cast<std::size_t>(m));

    for (Index n = 0; n < m; ++n) {
        const double u = duty[n];
        if (u == 1.0) {
            throw std::domain_error("duty[" + std::to_string(n) +
                                    "] = 1 keeps the switch closed; no equilibrium exists");
        }
        if (!(u >= 0.0 && u < 1.0)) {
            throw std::invalid_argument("duty[" + std::to_string(n) + "] = " + std::to_string(u) +
                                        " outside [0,1)");
        }
        eq.vC_bar[static_cast<std::size_t>(n)] =
            params.converters[static_cast<std::size_t>(n)].E / (1.0 - u);
    }
    for (Index n = 0; n < m; ++n) {
        const auto k = static_cast<std::size_t>(n);
        const auto kn = static_cast<std::size_t>(next_index(n, m));
        eq.iT_bar[k] = (eq.vC_bar[k] - eq.vC_bar[kn]) / params.lines[k].R1T;
    }
    for (Index n = 0; n < m; ++n) {
        const auto k = static_cast<std::size_t>(n);
        const auto kp = static_cast<std::size_t>(prev_index(n, m));
        eq.iL_bar[k] = (eq.vC_bar[k] / params.converters[k].R2T + eq.iT_bar[k] - eq.iT_bar[kp]) /
                       (1.0 - duty[n]);
    }
    return eq;
}

Equilibrium steady_state_for_voltages(const RingParams& params, const std::vector<double>& vCd) {
    const Index m = params.size();
    if (static_cast<Index>(vCd.size()) != m) {
        throw std::invalid_argument("target voltage list length does not match ring size");
    }
    DutyVector duty(m, 0.0);
    for (Index n = 0; n < m; ++n) {
        duty[n] = duty_from_voltage(params.converters[static_cast<std::size_t>(n)].E,
                                    vCd[static_cast<std::size_t>(n)]);
    }
    return steady_state(params, duty);
}

}  // namespace ringpbc

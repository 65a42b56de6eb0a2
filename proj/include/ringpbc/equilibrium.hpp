#pragma once

#include "ringpbc/model.hpp"

#include <vector>

namespace ringpbc {

/// Steady state of the averaged ring under constant duty ratios U_n.
struct Equilibrium {
    std::vector<double> iL_bar;
    std::vector<double> vC_bar;
    std::vector<double> iT_bar;
    DutyVector duty;

    [[nodiscard]] RingState state() const;
};

/// U = 1 - E / vCd. Throws std::invalid_argument when vCd <= 0 or E <= 0, and
/// std::domain_error when vCd < E (a boost stage cannot step down).
[[nodiscard]] double duty_from_voltage(double E, double vCd);

/// Closed-form steady state:
///   vC_n = E_n / (1 - U_n)
///   iT_n = (vC_n - vC_{n+1}) / R1T_n
///   iL_n = (vC_n / R2T_n + iT_n - iT_{n-1}) / (1 - U_n)
/// Throws std::domain_error when some U_n == 1 and std::invalid_argument for
/// U_n outside [0,1) or a size mismatch.
[[nodiscard]] Equilibrium steady_state(const RingParams& params, const DutyVector& duty);

/// Duties reaching the per-converter target voltages, then steady_state().
[[nodiscard]] Equilibrium steady_state_for_voltages(const RingParams& params,
                                                    const std::vector<double>& vCd);

}  // namespace ringpbc

#pragma once

// Plain-text export of simulation results.
//
// Trajectory CSV columns: t, then per converter n: iL_n, vC_n, iT_n, mu_n,
// Hd_n, then Hd_total. A run that failed ends with a "# FAILED: ..." line.

#include "ringpbc/sim.hpp"

#include <iosfwd>
#include <vector>

namespace ringpbc {

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Restores t, states, duties, hd, hd_total, ok and failure. Throws
/// std::runtime_error on a malformed file.
[[nodiscard]] Trajectory read_trajectory_csv(std::istream& is);

void write_event_log(std::ostream& os, const std::vector<SimEvent>& events);

/// Switched runs: t, then iL_n, vC_n, iT_n averaged over the last completed PWM period.
void write_period_average_csv(std::ostream& os, const Trajectory& traj);

}  // namespace ringpbc

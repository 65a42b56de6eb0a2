#pragma once

#include "ringpbc/execution.hpp"
#include "ringpbc/sim.hpp"

#include <optional>
#include <span>
#include <vector>

namespace ringpbc {

struct CrossValidationReport {
    std::vector<double> dts;
    /// max |x_rk4(dt) - x_rk45| over every recorded sample and plant slot.
    std::vector<double> deviation_vs_rk45;
    /// max |x_rk4(dts[i]) - x_rk4(dts[i+1])|.
    std::vector<double> deviation_successive;
    /// log(d01 / d12) / log(dt0 / dt1) from the first three step sizes.
    std::optional<double> order_estimate;
};

/// Largest absolute difference between the plant states of two trajectories
/// sampled on the same output grid. Throws std::invalid_argument otherwise.
[[nodiscard]] double max_state_deviation(const Trajectory& a, const Trajectory& b);

/// Runs the job with RK4 at every dt in dt_list and once with RK45 (using the
/// job's tolerances), all on the job's output grid. Requires averaged mode and
/// at least one dt.
[[nodiscard]] CrossValidationReport cross_validate(const SimulationJob& job,
                                                   std::span<const double> dt_list,
                                                   Execution exec = Execution::Parallel);

}  // namespace ringpbc

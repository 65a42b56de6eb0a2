#pragma once

// Independent simulation runs executed as one data-parallel batch.

#include "ringpbc/execution.hpp"
#include "ringpbc/sim.hpp"

#include <span>
#include <vector>

namespace ringpbc {

/// Runs every job; result i belongs to job i. Parallel and serial execution
/// give bit-identical trajectories. The first exception thrown by any job is
/// rethrown after the batch finishes.
[[nodiscard]] std::vector<Trajectory> run_batch(std::span<const SimulationJob> jobs,
                                                Execution exec = Execution::Parallel);

/// Serial reference for run_batch().
[[nodiscard]] std::vector<Trajectory> run_batch_serial(std::span<const SimulationJob> jobs);

}  // namespace ringpbc

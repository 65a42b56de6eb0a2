#pragma once

namespace ringpbc {

/// Selects the OpenMP kernel or the serial reference loop. Both produce
/// bit-identical results; the serial path is kept for testing and benchmarks.
enum class Execution { Serial, Parallel };

/// Number of threads the parallel kernels will use (1 without OpenMP).
[[nodiscard]] int parallel_thread_count();

}  // namespace ringpbc

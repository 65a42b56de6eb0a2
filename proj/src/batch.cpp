#include "ringpbc/batch.hpp"

#include <exception>

#ifdef RINGPBC_HAVE_OPENMP
#include <omp.h>
#endif

namespace ringpbc {

int parallel_thread_count() {
#ifdef RINGPBC_HAVE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

std::vector<Trajectory> run_batch_serial(std::span<const SimulationJob> jobs) {
    std::vector<Trajectory> out;
    out.reserve(jobs.size());
    for (const auto& job : jobs) out.push_back(run_job(job));
    return out;
}

std::vector<Trajectory> run_batch(std::span<const SimulationJob> jobs, Execution exec) {
    if (exec == Execution::Serial) return run_batch_serial(jobs);

    const auto count = static_cast<long>(jobs.size());
    std::vector<Trajectory> out(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());

#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < count; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            out[k] = run_job(jobs[k]);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }

    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

}  // namespace ringpbc

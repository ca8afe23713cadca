#pragma once

#include <cstddef>
#include <exception>

namespace skewdiff {

/// Worker count for path-parallel loops. Defaults to $SKEWDIFF_THREADS, else 1.
int thread_count() noexcept;
void set_thread_count(int n) noexcept;

/// Runs fn(i) for i in [0, n) on the worker pool with a static schedule.
/// Each index must write only to its own output slot. The first exception thrown
/// by any worker is rethrown after the loop.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    std::exception_ptr failure;
    const long count = static_cast<long>(n);
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (long i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(skewdiff_parallel_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace skewdiff

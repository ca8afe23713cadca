#include "skewdiff/parallel.hpp"

#include <atomic>
#include <cstdlib>

namespace skewdiff {

namespace {

int initial_threads() noexcept {
    if (const char* env = std::getenv("SKEWDIFF_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

std::atomic<int>& threads() noexcept {
    static std::atomic<int> n{initial_threads()};
    return n;
}

}  // namespace

int thread_count() noexcept { return threads().load(); }

void set_thread_count(int n) noexcept { threads().store(n > 0 ? n : 1); }

}  // namespace skewdiff

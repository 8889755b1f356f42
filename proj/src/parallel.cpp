#include "hcam/parallel.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hcam::par {

namespace {
std::atomic<int> g_threads{0};  // 0 = use hardware default
}

int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

int threads() {
    const int t = g_threads.load(std::memory_order_relaxed);
    return t > 0 ? t : hardware_threads();
}

void set_threads(int n) { g_threads.store(n, std::memory_order_relaxed); }

void for_each_index(int n, const std::function<void(int)>& fn) {
    const int t = threads();
    if (t <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(t)
    for (int i = 0; i < n; ++i) fn(i);
#else
    for (int i = 0; i < n; ++i) fn(i);
#endif
}

}  // namespace hcam::par

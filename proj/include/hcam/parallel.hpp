#pragma once

#include <functional>

namespace hcam::par {

// Number of threads OpenMP would use; 1 when built without OpenMP.
int hardware_threads();

// Active thread count for the kernels below. set_threads(1) selects the
// serial reference path; tests compare it against the parallel path and the
// bench target times both.
int threads();
void set_threads(int n);

// Index-parallel loop. Iterations must be independent; results must be
// written to disjoint slots so the outcome is identical for any thread count.
void for_each_index(int n, const std::function<void(int)>& fn);

}  // namespace hcam::par

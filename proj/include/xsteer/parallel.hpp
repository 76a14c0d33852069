#pragma once

#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace xsteer {

inline int hardware_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Runs fn(i) for i in [0, n). workers <= 1 runs serially in index order;
// otherwise iterations are distributed over an OpenMP team. Callers must make
// fn(i) write only to slot i of pre-sized output buffers and then merge the
// slots serially in index order — that keeps results bit-identical for every
// worker count. If any iteration throws, the lowest-index exception is
// rethrown after the loop completes.
template <typename Fn>
void parallel_for_index(int n, int workers, Fn&& fn) {
  if (n <= 0) return;
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
#ifdef _OPENMP
  std::vector<std::exception_ptr> errs(static_cast<size_t>(n));
#pragma omp parallel for num_threads(workers) schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      errs[static_cast<size_t>(i)] = std::current_exception();
    }
  }
  for (int i = 0; i < n; ++i)
    if (errs[static_cast<size_t>(i)]) std::rethrow_exception(errs[static_cast<size_t>(i)]);
#else
  for (int i = 0; i < n; ++i) fn(i);
#endif
}

}  // namespace xsteer

#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace teq {

// Execution policy for corpus sweeps. Every parallel sweep has a serial
// twin with identical results; tests compare the two.
enum class Exec : unsigned char { Serial, Parallel };

// Runs body(0..n-1). The body must not throw and may only write to
// disjoint slots of pre-sized output storage.
template <class F>
void parallel_for(Exec exec, std::size_t n, F&& body) {
#ifdef _OPENMP
  if (exec == Exec::Parallel) {
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
    return;
  }
#else
  (void)exec;
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace teq

#ifndef LDP_PARALLEL_HPP
#define LDP_PARALLEL_HPP

#include <cstddef>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ldp {

/// Number of worker threads available to the OpenMP pool (1 without OpenMP).
int hardware_threads();

/// Runs body(i) for i in [0,count) on `threads` workers.
///
/// Replicates are independent by construction (each derives its own RNG
/// stream from the master seed), so the schedule does not affect results:
/// run_indexed with threads==1 is the serial reference and must produce
/// bit-identical output slots. Tested in test_parallel.cpp and timed in
/// tools/bench_replicates.cpp.
template <class F>
void run_indexed(std::size_t count, int threads, F&& body) {
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); ++i)
    body(static_cast<std::size_t>(i));
#else
  for (std::size_t i = 0; i < count; ++i) body(i);
#endif
}

}  // namespace ldp

#endif

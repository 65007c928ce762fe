#pragma once

#include <cstddef>

#ifdef PMHDG_HAVE_OPENMP
#include <omp.h>
#endif

namespace pmhdg {

enum class ExecMode { Serial, OpenMP };

/// Process-wide default execution mode for the data-parallel kernels
/// (assembly over cells, particle sweeps). The serial mode is the reference
/// implementation; tests compare the two.
inline ExecMode& default_exec_mode() {
#ifdef PMHDG_HAVE_OPENMP
  static ExecMode mode = ExecMode::OpenMP;
#else
  static ExecMode mode = ExecMode::Serial;
#endif
  return mode;
}

/// Apply fn(i) for i in [0, n). Results must not depend on iteration order;
/// every kernel routed through here writes to disjoint slots only.
template <typename F>
void parallel_for(std::size_t n, F&& fn, ExecMode mode) {
#ifdef PMHDG_HAVE_OPENMP
  if (mode == ExecMode::OpenMP) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
  }
#else
  (void)mode;
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

template <typename F>
void parallel_for(std::size_t n, F&& fn) {
  parallel_for(n, fn, default_exec_mode());
}

}  // namespace pmhdg

#pragma once

// Thin OpenMP shim: the parallel kernels compile to their serial loop when
// the library is built without OpenMP.

#ifdef EMM_HAVE_OPENMP
#include <omp.h>
#define EMM_PARALLEL_FOR _Pragma("omp parallel for schedule(dynamic, 1)")
#else
#define EMM_PARALLEL_FOR
inline int omp_get_max_threads() { return 1; }
inline int omp_get_thread_num() { return 0; }
inline void omp_set_num_threads(int) {}
#endif

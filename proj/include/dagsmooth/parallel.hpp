#pragma once

namespace dagsmooth {

/// Worker count for parallel loops: the OpenMP default, capped by the
/// DAGSMOOTH_THREADS environment variable and by set_thread_cap(). Returns 1
/// when built without OpenMP.
int max_threads();

/// Process-wide cap for tests and benchmarking; 0 removes the cap.
void set_thread_cap(int cap);

/// True when the library was compiled with OpenMP support.
bool openmp_enabled() noexcept;

}  // namespace dagsmooth

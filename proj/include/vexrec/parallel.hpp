#pragma once

#include <cstddef>
#include <optional>

namespace vexrec {

// Number of worker threads available to the OpenMP kernels (1 without OpenMP).
int max_threads();
void set_max_threads(int n);

// Caps the thread count from VEXREC_THREADS when set to a positive integer.
// Returns the parsed cap, if any.
std::optional<int> apply_thread_cap_from_env();

}  // namespace vexrec

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace singtrace {

// SINGTRACE_THREADS caps the worker count; unset means 1.
int thread_count();

// Runs body(i) for i in [0, n). Results must be written to per-index slots;
// the order of execution is unspecified.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// splitmix64 of (root, index): per-trial seeds independent of scheduling
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

}  // namespace singtrace

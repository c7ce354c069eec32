#pragma once

#include <cstddef>
#include <cstdint>

// Execution switch shared by the data-parallel kernels. Every kernel keeps a
// serial path that the tests compare against the OpenMP one.
namespace collrabi {

enum class Exec { parallel, serial };

namespace kernels {

// Calls fn(i) for i in [0, n). Iterations must be independent; results
// are written by index so the output never depends on scheduling.
template <typename Fn>
void for_each_index(std::size_t n, Exec exec, Fn&& fn) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
}

}  // namespace kernels
}  // namespace collrabi

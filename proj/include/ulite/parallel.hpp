// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace ulite {

/// Worker count used by parallel_for. Results never depend on it: every
/// iteration owns its outputs and runs its reductions serially.
void set_num_threads(int n);
int num_threads();

namespace detail {
bool parallel_enabled(std::size_t iterations, std::size_t work_per_iteration);
}

/// Runs fn(i) for i in [0, n). `work` is a rough per-iteration cost used to
/// keep tiny loops single-threaded.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t work, Fn&& fn) {
  if (!detail::parallel_enabled(n, work)) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(num_threads())
  for (long long i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
}

}  // namespace ulite

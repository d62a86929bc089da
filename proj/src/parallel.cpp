// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#include "ulite/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>

namespace ulite {
namespace {

int initial_threads() {
  if (const char* env = std::getenv("ULITE_NUM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1, omp_get_max_threads());
}

std::atomic<int>& thread_setting() {
  static std::atomic<int> threads{initial_threads()};
  return threads;
}

}  // namespace

void set_num_threads(int n) { thread_setting() = std::max(1, n); }

int num_threads() { return thread_setting(); }

namespace detail {

bool parallel_enabled(std::size_t iterations, std::size_t work_per_iteration) {
  constexpr std::size_t kMinWork = 1 << 14;
  return num_threads() > 1 && iterations > 1 && iterations * work_per_iteration >= kMinWork &&
         omp_in_parallel() == 0;
}

}  // namespace detail
}  // namespace ulite

// Copyright 2026 The qmp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Per-sample loops over time grids. Every kernel has a serial path that is
// the reference for tests and an OpenMP path that must agree with it bit for
// bit (each index is computed independently, no reductions across threads).

#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <vector>

namespace qmp {

enum class Execution { serial, parallel };

inline Execution default_execution() { return Execution::parallel; }

/// Calls f(i) for i in [0, n). Exceptions thrown by f are rethrown on the
/// calling thread (the first one wins).
template <class F>
void for_each_index(std::size_t n, Execution ex, F&& f) {
  if (ex == Execution::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr err;
  std::mutex mu;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      f(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

/// out[i] = f(i) for i in [0, n).
template <class T, class F>
std::vector<T> map_indices(std::size_t n, Execution ex, F&& f) {
  std::vector<T> out(n);
  for_each_index(n, ex, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

}  // namespace qmp

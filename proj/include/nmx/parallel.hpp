/*
 * Copyright 2026 The nmx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace nmx {

inline unsigned worker_count(std::uint64_t work_items) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(hw, std::max<std::uint64_t>(1, work_items)));
}

// Splits [0, n) into contiguous chunks, one per worker, and calls
// fn(worker, begin, end) for each. Runs inline when only one worker is used.
// The first exception raised by a worker is rethrown after all join.
template <class Fn>
void parallel_chunks(std::uint64_t n, unsigned workers, Fn&& fn) {
  if (workers <= 1 || n < 2) {
    fn(0u, std::uint64_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  const std::uint64_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t b = std::min(n, w * chunk);
    const std::uint64_t e = std::min(n, b + chunk);
    pool.emplace_back([&fn, &errors, w, b, e] {
      try {
        fn(w, b, e);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace nmx

// Copyright 2026 The kacpru Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace kacpru {

inline unsigned default_threads() {
  if (const char* env = std::getenv("KACPRU_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs fn(batch) for batch in [0, n_batches) on a pool of `threads` workers.
// The batch decomposition is fixed by the caller, never by the thread count,
// so each batch computes the same values no matter how work is scheduled;
// the caller combines per-batch results in batch order afterwards.
inline void for_batches(std::size_t n_batches, unsigned threads,
                        const std::function<void(std::size_t)>& fn) {
  if (n_batches == 0) return;
  if (threads <= 1 || n_batches == 1) {
    for (std::size_t b = 0; b < n_batches; ++b) fn(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  auto worker = [&] {
    while (true) {
      std::size_t b = next.fetch_add(1);
      if (b >= n_batches || failed.load()) return;
      try {
        fn(b);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  unsigned n = std::min<std::size_t>(threads, n_batches);
  pool.reserve(n);
  for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace kacpru

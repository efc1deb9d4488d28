// Copyright 2026 The Kinepipe Authors
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

#include "kinepipe/worker_pool.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace kinepipe {
namespace {

std::string Describe(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown exception";
  }
}

}  // namespace

void RunIndexed(int count, int workers,
                const std::function<void(int, int)>& task) {
  if (count < 0) throw InputError("batch count must be non-negative");
  if (workers < 1) throw InputError("workers must be >= 1");

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  int first_failure = -1;
  std::exception_ptr failure;

  auto loop = [&](int worker) {
    for (;;) {
      // Stop handing out new batches once any batch has failed.
      if (failed.load(std::memory_order_acquire)) return;
      const int i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        task(i, worker);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (first_failure < 0 || i < first_failure) {
          first_failure = i;
          failure = std::current_exception();
        }
        failed.store(true, std::memory_order_release);
      }
    }
  };

  const int threads = std::min(workers, count);
  if (threads <= 1) {
    loop(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(loop, t);
    for (auto& th : pool) th.join();
  }
  if (failure) throw BatchError(first_failure, Describe(failure));
}

}  // namespace kinepipe

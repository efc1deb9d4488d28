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

#ifndef KINEPIPE_WORKER_POOL_H_
#define KINEPIPE_WORKER_POOL_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kinepipe/error.h"

namespace kinepipe {

// A batch task failed; carries the index of the failing batch.
class BatchError : public Error {
 public:
  BatchError(int batch_index, const std::string& what)
      : Error("batch " + std::to_string(batch_index) + ": " + what),
        batch_index_(batch_index) {}
  int batch_index() const { return batch_index_; }

 private:
  int batch_index_;
};

// Runs task(i, worker) for i in [0, count) on a fixed pool of `workers`
// threads; `worker` in [0, workers) identifies the executing thread. Tasks
// are dispatched in index order; each thread pulls the next index when it
// finishes its previous one. With workers == 1 everything runs on the
// calling thread. Failures are collected and the lowest failing index is
// rethrown as BatchError after all started tasks finish.
void RunIndexed(int count, int workers,
                const std::function<void(int, int)>& task);

// Convenience wrapper returning results keyed by batch index.
template <typename R>
std::vector<R> MapBatches(int count, int workers,
                          const std::function<R(int)>& task) {
  std::vector<std::optional<R>> slots(count);
  RunIndexed(count, workers,
             [&](int i, int) { slots[i].emplace(task(i)); });
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace kinepipe

#endif  // KINEPIPE_WORKER_POOL_H_

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

#include <atomic>
#include <chrono>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include <gtest/gtest.h>

namespace kinepipe {
namespace {

TEST(RunIndexedTest, VisitsEveryIndexOnce) {
  for (int workers : {1, 2, 4, 16}) {
    std::vector<std::atomic<int>> hits(37);
    RunIndexed(37, workers, [&](int i, int) { hits[i]++; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST(RunIndexedTest, ZeroCountIsANoOp) {
  bool called = false;
  RunIndexed(0, 4, [&](int, int) { called = true; });
  EXPECT_FALSE(called);
}

TEST(RunIndexedTest, WorkerIdsStayInRange) {
  std::mutex mu;
  std::set<int> ids;
  RunIndexed(20, 3, [&](int, int w) {
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
    std::lock_guard lock(mu);
    ids.insert(w);
  });
  for (int w : ids) {
    EXPECT_GE(w, 0);
    EXPECT_LT(w, 3);
  }
}

TEST(RunIndexedTest, NeverUsesMoreThreadsThanTasks) {
  std::mutex mu;
  std::set<int> ids;
  RunIndexed(2, 8, [&](int, int w) {
    std::lock_guard lock(mu);
    ids.insert(w);
  });
  for (int w : ids) EXPECT_LT(w, 2);
}

TEST(RunIndexedTest, SleepsOverlapAcrossWorkers) {
  const auto start = std::chrono::steady_clock::now();
  RunIndexed(4, 4, [](int, int) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  });
  const double s = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  EXPECT_LT(s, 0.3);
}

TEST(RunIndexedTest, FailureNamesTheLowestFailingBatch) {
  for (int workers : {1, 4}) {
    try {
      RunIndexed(10, workers, [](int i, int) {
        if (i == 3 || i == 7) throw std::runtime_error("boom " + std::to_string(i));
      });
      FAIL() << "expected BatchError";
    } catch (const BatchError& e) {
      EXPECT_EQ(e.batch_index(), 3);
      EXPECT_STREQ(e.what(), "batch 3: boom 3");
    }
  }
}

TEST(RunIndexedTest, RejectsBadWorkerCount) {
  EXPECT_THROW(RunIndexed(3, 0, [](int, int) {}), Error);
}

TEST(MapBatchesTest, KeepsIndexOrder) {
  const auto out = MapBatches<int>(50, 4, [](int i) {
    std::this_thread::sleep_for(std::chrono::microseconds((50 - i) * 20));
    return i * i;
  });
  ASSERT_EQ(out.size(), 50u);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(out[i], i * i);
}

}  // namespace
}  // namespace kinepipe

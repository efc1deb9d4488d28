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

#include "kinepipe/simd/kernels.h"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace kinepipe::simd {
namespace {

constexpr double kPi = std::numbers::pi;

struct Inputs {
  std::vector<double> a, b, mask;
};

Inputs Make(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-4.0 * kPi, 4.0 * kPi);
  Inputs in;
  in.a.resize(rows * cols);
  in.b.resize(rows * cols);
  for (auto& v : in.a) v = angle(rng);
  for (auto& v : in.b) v = angle(rng);
  in.mask.resize(cols);
  for (std::size_t c = 0; c < cols; ++c) in.mask[c] = (c % 5 == 1) ? 0.0 : 1.0;
  return in;
}

double Rel(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

// Direct wrap oracle: repeated shifting into (-pi, pi].
double WrapOracle(double d) {
  while (d > kPi) d -= 2 * kPi;
  while (d <= -kPi) d += 2 * kPi;
  return d;
}

TEST(ScalarKernelsTest, WrappedSumsMatchOracle) {
  const Inputs in = Make(7, 9, 1);
  double abs_sum = 0, sum = 0;
  ScalarKernels().wrapped_diff_sums(in.a.data(), in.b.data(), 7, 9,
                                    in.mask.data(), &abs_sum, &sum);
  double want_abs = 0, want = 0;
  for (std::size_t t = 0; t < 7; ++t) {
    for (std::size_t c = 0; c < 9; ++c) {
      const double w = WrapOracle(in.b[t * 9 + c] - in.a[t * 9 + c]) * in.mask[c];
      want_abs += std::abs(w);
      want += w;
    }
  }
  EXPECT_NEAR(abs_sum, want_abs, 1e-9);
  EXPECT_NEAR(sum, want, 1e-9);
}

TEST(ScalarKernelsTest, WrapBoundary) {
  const double a[2] = {0.0, 0.0};
  const double b[2] = {kPi, -kPi};
  const double mask[2] = {1.0, 1.0};
  double abs_sum = 0, sum = 0;
  ScalarKernels().wrapped_diff_sums(a, b, 1, 2, mask, &abs_sum, &sum);
  // Both differences map to +pi.
  EXPECT_NEAR(sum, 2 * kPi, 1e-12);
}

class KernelEquivalenceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    avx2_ = Avx2Kernels();
    if (avx2_ == nullptr) GTEST_SKIP() << "AVX2 kernels unavailable";
  }
  const MetricKernels* avx2_ = nullptr;
};

TEST_F(KernelEquivalenceTest, AllKernelsAgreeIncludingTails) {
  const MetricKernels& s = ScalarKernels();
  const MetricKernels& v = *avx2_;
  std::uint64_t seed = 0;
  for (std::size_t rows : {1u, 2u, 3u, 4u, 5u, 8u, 13u}) {
    for (std::size_t cols : {1u, 3u, 4u, 5u, 7u, 8u, 9u, 40u}) {
      const Inputs in = Make(rows, cols, ++seed);
      double sa = 0, ss = 0, va = 0, vs = 0;
      s.wrapped_diff_sums(in.a.data(), in.b.data(), rows, cols, in.mask.data(), &sa, &ss);
      v.wrapped_diff_sums(in.a.data(), in.b.data(), rows, cols, in.mask.data(), &va, &vs);
      EXPECT_LT(Rel(va, sa), 1e-12);
      EXPECT_LT(Rel(vs, ss), 1e-12);

      EXPECT_LT(Rel(v.wrapped_diff_sq_dev(in.a.data(), in.b.data(), rows, cols,
                                          in.mask.data(), 0.3),
                    s.wrapped_diff_sq_dev(in.a.data(), in.b.data(), rows, cols,
                                          in.mask.data(), 0.3)),
                1e-12);

      const std::size_t points = rows * cols / 3;
      EXPECT_LT(Rel(v.point_distance_sum(in.a.data(), in.b.data(), points),
                    s.point_distance_sum(in.a.data(), in.b.data(), points)),
                1e-12);

      for (int order : {1, 3}) {
        if (rows <= static_cast<std::size_t>(order)) continue;
        EXPECT_LT(Rel(v.diff_abs_sum(in.a.data(), rows, cols, in.mask.data(), order),
                      s.diff_abs_sum(in.a.data(), rows, cols, in.mask.data(), order)),
                  1e-12);
      }

      std::vector<double> cs(cols), cv(cols);
      s.column_sums(in.a.data(), rows, cols, cs.data());
      v.column_sums(in.a.data(), rows, cols, cv.data());
      for (std::size_t c = 0; c < cols; ++c) EXPECT_LT(Rel(cv[c], cs[c]), 1e-12);

      std::vector<double> sxx(cols), syy(cols), sxy(cols);
      std::vector<double> vxx(cols), vyy(cols), vxy(cols);
      s.centered_moments(in.a.data(), in.b.data(), rows, cols, cs.data(), cs.data(),
                         sxx.data(), syy.data(), sxy.data());
      v.centered_moments(in.a.data(), in.b.data(), rows, cols, cs.data(), cs.data(),
                         vxx.data(), vyy.data(), vxy.data());
      for (std::size_t c = 0; c < cols; ++c) {
        EXPECT_LT(Rel(vxx[c], sxx[c]), 1e-12);
        EXPECT_LT(Rel(vyy[c], syy[c]), 1e-12);
        EXPECT_LT(Rel(vxy[c], sxy[c]), 1e-12);
      }
    }
  }
}

// The selection is made once per process; ctest runs this case both with
// and without KINEPIPE_SIMD=scalar.
TEST(ActiveKernelsTest, HonorsEnvironment) {
  const char* env = std::getenv("KINEPIPE_SIMD");
  if (env != nullptr && std::string(env) == "scalar") {
    EXPECT_EQ(&ActiveKernels(), &ScalarKernels());
  } else if (Avx2Kernels() != nullptr) {
    EXPECT_EQ(&ActiveKernels(), Avx2Kernels());
  } else {
    EXPECT_EQ(&ActiveKernels(), &ScalarKernels());
  }
}

}  // namespace
}  // namespace kinepipe::simd

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

#include <cmath>
#include <numbers>

#include "kinepipe/simd/kernels.h"
#include "src/simd/wrap.h"

namespace kinepipe::simd {
namespace {

void WrappedDiffSums(const double* a, const double* b, std::size_t rows,
                     std::size_t cols, const double* col_mask, double* abs_sum,
                     double* sum) {
  double acc_abs = 0.0;
  double acc = 0.0;
  for (std::size_t t = 0; t < rows; ++t) {
    const double* ra = a + t * cols;
    const double* rb = b + t * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = WrapAngle(rb[c] - ra[c]);
      acc_abs += col_mask[c] * std::fabs(d);
      acc += col_mask[c] * d;
    }
  }
  *abs_sum = acc_abs;
  *sum = acc;
}

double WrappedDiffSqDev(const double* a, const double* b, std::size_t rows,
                        std::size_t cols, const double* col_mask, double mean) {
  double acc = 0.0;
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double e = WrapAngle(b[t * cols + c] - a[t * cols + c]) - mean;
      acc += col_mask[c] * (e * e);
    }
  }
  return acc;
}

double PointDistanceSum(const double* a, const double* b, std::size_t points) {
  double acc = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double dx = a[3 * i] - b[3 * i];
    const double dy = a[3 * i + 1] - b[3 * i + 1];
    const double dz = a[3 * i + 2] - b[3 * i + 2];
    acc += std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return acc;
}

double DiffAbsSum(const double* q, std::size_t rows, std::size_t cols,
                  const double* col_mask, int order) {
  double acc = 0.0;
  if (rows <= static_cast<std::size_t>(order)) return 0.0;
  for (std::size_t t = 0; t + order < rows; ++t) {
    const double* r0 = q + t * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      double d;
      if (order == 1) {
        d = r0[cols + c] - r0[c];
      } else {
        d = (r0[3 * cols + c] - r0[c]) - 3.0 * (r0[2 * cols + c] - r0[cols + c]);
      }
      acc += col_mask[c] * std::fabs(d);
    }
  }
  return acc;
}

void ColumnSums(const double* x, std::size_t rows, std::size_t cols,
                double* out) {
  for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0;
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t c = 0; c < cols; ++c) out[c] += x[t * cols + c];
  }
}

void CenteredMoments(const double* x, const double* y, std::size_t rows,
                     std::size_t cols, const double* mean_x,
                     const double* mean_y, double* sxx, double* syy,
                     double* sxy) {
  for (std::size_t c = 0; c < cols; ++c) sxx[c] = syy[c] = sxy[c] = 0.0;
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double dx = x[t * cols + c] - mean_x[c];
      const double dy = y[t * cols + c] - mean_y[c];
      sxx[c] += dx * dx;
      syy[c] += dy * dy;
      sxy[c] += dx * dy;
    }
  }
}

}  // namespace

const MetricKernels& ScalarKernels() {
  static const MetricKernels kernels{
      "scalar",        WrappedDiffSums, WrappedDiffSqDev, PointDistanceSum,
      DiffAbsSum,      ColumnSums,      CenteredMoments,
  };
  return kernels;
}

}  // namespace kinepipe::simd

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

#ifndef KINEPIPE_SIMD_KERNELS_H_
#define KINEPIPE_SIMD_KERNELS_H_

#include <cstddef>

namespace kinepipe::simd {

// Inner loops of the metrics layer. Matrices are row-major `rows x cols`
// (frames x DOFs). `col_mask` holds 1.0 for included columns and 0.0 for
// excluded ones. Angles are radians; wrapped differences lie in (-pi, pi].
struct MetricKernels {
  const char* name;

  // abs_sum = sum mask * |wrap(b - a)|, sum = sum mask * wrap(b - a).
  void (*wrapped_diff_sums)(const double* a, const double* b, std::size_t rows,
                            std::size_t cols, const double* col_mask,
                            double* abs_sum, double* sum);

  // sum mask * (wrap(b - a) - mean)^2.
  double (*wrapped_diff_sq_dev)(const double* a, const double* b,
                                std::size_t rows, std::size_t cols,
                                const double* col_mask, double mean);

  // sum over points of |a_i - b_i| for xyz-interleaved point arrays.
  double (*point_distance_sum)(const double* a, const double* b,
                               std::size_t points);

  // sum mask * |D^order q| over frames, order 1 or 3 (forward differences).
  double (*diff_abs_sum)(const double* q, std::size_t rows, std::size_t cols,
                         const double* col_mask, int order);

  // out[c] = sum_t x[t, c].
  void (*column_sums)(const double* x, std::size_t rows, std::size_t cols,
                      double* out);

  // Centered second moments per column around the given means.
  void (*centered_moments)(const double* x, const double* y, std::size_t rows,
                           std::size_t cols, const double* mean_x,
                           const double* mean_y, double* sxx, double* syy,
                           double* sxy);
};

const MetricKernels& ScalarKernels();

// Null when the AVX2 variant is not compiled in or the CPU lacks AVX2/FMA.
const MetricKernels* Avx2Kernels();

// Kernel set used by the metrics layer: AVX2 when available, else scalar.
// KINEPIPE_SIMD=scalar forces the scalar reference.
const MetricKernels& ActiveKernels();

}  // namespace kinepipe::simd

#endif  // KINEPIPE_SIMD_KERNELS_H_

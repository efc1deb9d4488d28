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

// AVX2 variants of the metrics kernels. Compiled with -mavx2 -mfma and only
// reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>
#include <numbers>

#include "kinepipe/simd/kernels.h"
#include "src/simd/wrap.h"

namespace kinepipe::simd {
namespace {

inline __m256d Wrap4(__m256d d) {
  const __m256d pi = _mm256_set1_pd(std::numbers::pi);
  const __m256d k = _mm256_ceil_pd(
      _mm256_mul_pd(_mm256_sub_pd(d, pi), _mm256_set1_pd(kInvTwoPi)));
  return _mm256_sub_pd(d, _mm256_mul_pd(_mm256_set1_pd(kTwoPi), k));
}

inline __m256d Abs4(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

inline double HorizontalSum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void WrappedDiffSums(const double* a, const double* b, std::size_t rows,
                     std::size_t cols, const double* col_mask, double* abs_sum,
                     double* sum) {
  __m256d acc_abs = _mm256_setzero_pd();
  __m256d acc = _mm256_setzero_pd();
  double tail_abs = 0.0;
  double tail = 0.0;
  const std::size_t vec_cols = cols & ~std::size_t{3};
  for (std::size_t t = 0; t < rows; ++t) {
    const double* ra = a + t * cols;
    const double* rb = b + t * cols;
    std::size_t c = 0;
    for (; c < vec_cols; c += 4) {
      const __m256d m = _mm256_loadu_pd(col_mask + c);
      const __m256d d = Wrap4(
          _mm256_sub_pd(_mm256_loadu_pd(rb + c), _mm256_loadu_pd(ra + c)));
      acc_abs = _mm256_add_pd(acc_abs, _mm256_mul_pd(m, Abs4(d)));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(m, d));
    }
    for (; c < cols; ++c) {
      const double d = WrapAngle(rb[c] - ra[c]);
      tail_abs += col_mask[c] * std::fabs(d);
      tail += col_mask[c] * d;
    }
  }
  *abs_sum = HorizontalSum(acc_abs) + tail_abs;
  *sum = HorizontalSum(acc) + tail;
}

double WrappedDiffSqDev(const double* a, const double* b, std::size_t rows,
                        std::size_t cols, const double* col_mask, double mean) {
  __m256d acc = _mm256_setzero_pd();
  const __m256d mu = _mm256_set1_pd(mean);
  double tail = 0.0;
  const std::size_t vec_cols = cols & ~std::size_t{3};
  for (std::size_t t = 0; t < rows; ++t) {
    const double* ra = a + t * cols;
    const double* rb = b + t * cols;
    std::size_t c = 0;
    for (; c < vec_cols; c += 4) {
      const __m256d m = _mm256_loadu_pd(col_mask + c);
      const __m256d e = _mm256_sub_pd(
          Wrap4(_mm256_sub_pd(_mm256_loadu_pd(rb + c), _mm256_loadu_pd(ra + c))),
          mu);
      acc = _mm256_fmadd_pd(m, _mm256_mul_pd(e, e), acc);
    }
    for (; c < cols; ++c) {
      const double e = WrapAngle(rb[c] - ra[c]) - mean;
      tail += col_mask[c] * (e * e);
    }
  }
  return HorizontalSum(acc) + tail;
}

double PointDistanceSum(const double* a, const double* b, std::size_t points) {
  // Gather x, y, z of four consecutive points at stride 3.
  const __m256i idx = _mm256_set_epi64x(9, 6, 3, 0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= points; i += 4) {
    const double* pa = a + 3 * i;
    const double* pb = b + 3 * i;
    const __m256d dx = _mm256_sub_pd(_mm256_i64gather_pd(pa, idx, 8),
                                     _mm256_i64gather_pd(pb, idx, 8));
    const __m256d dy = _mm256_sub_pd(_mm256_i64gather_pd(pa + 1, idx, 8),
                                     _mm256_i64gather_pd(pb + 1, idx, 8));
    const __m256d dz = _mm256_sub_pd(_mm256_i64gather_pd(pa + 2, idx, 8),
                                     _mm256_i64gather_pd(pb + 2, idx, 8));
    __m256d sq = _mm256_mul_pd(dx, dx);
    sq = _mm256_fmadd_pd(dy, dy, sq);
    sq = _mm256_fmadd_pd(dz, dz, sq);
    acc = _mm256_add_pd(acc, _mm256_sqrt_pd(sq));
  }
  double tail = 0.0;
  for (; i < points; ++i) {
    const double dx = a[3 * i] - b[3 * i];
    const double dy = a[3 * i + 1] - b[3 * i + 1];
    const double dz = a[3 * i + 2] - b[3 * i + 2];
    tail += std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return HorizontalSum(acc) + tail;
}

double DiffAbsSum(const double* q, std::size_t rows, std::size_t cols,
                  const double* col_mask, int order) {
  if (rows <= static_cast<std::size_t>(order)) return 0.0;
  __m256d acc = _mm256_setzero_pd();
  const __m256d three = _mm256_set1_pd(3.0);
  double tail = 0.0;
  const std::size_t vec_cols = cols & ~std::size_t{3};
  for (std::size_t t = 0; t + order < rows; ++t) {
    const double* r0 = q + t * cols;
    std::size_t c = 0;
    for (; c < vec_cols; c += 4) {
      const __m256d m = _mm256_loadu_pd(col_mask + c);
      __m256d d;
      if (order == 1) {
        d = _mm256_sub_pd(_mm256_loadu_pd(r0 + cols + c),
                          _mm256_loadu_pd(r0 + c));
      } else {
        const __m256d outer = _mm256_sub_pd(_mm256_loadu_pd(r0 + 3 * cols + c),
                                            _mm256_loadu_pd(r0 + c));
        const __m256d inner = _mm256_sub_pd(_mm256_loadu_pd(r0 + 2 * cols + c),
                                            _mm256_loadu_pd(r0 + cols + c));
        d = _mm256_sub_pd(outer, _mm256_mul_pd(three, inner));
      }
      acc = _mm256_fmadd_pd(m, Abs4(d), acc);
    }
    for (; c < cols; ++c) {
      double d;
      if (order == 1) {
        d = r0[cols + c] - r0[c];
      } else {
        d = (r0[3 * cols + c] - r0[c]) - 3.0 * (r0[2 * cols + c] - r0[cols + c]);
      }
      tail += col_mask[c] * std::fabs(d);
    }
  }
  return HorizontalSum(acc) + tail;
}

void ColumnSums(const double* x, std::size_t rows, std::size_t cols,
                double* out) {
  const std::size_t vec_cols = cols & ~std::size_t{3};
  for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0;
  for (std::size_t t = 0; t < rows; ++t) {
    const double* r = x + t * cols;
    std::size_t c = 0;
    for (; c < vec_cols; c += 4) {
      _mm256_storeu_pd(out + c, _mm256_add_pd(_mm256_loadu_pd(out + c),
                                              _mm256_loadu_pd(r + c)));
    }
    for (; c < cols; ++c) out[c] += r[c];
  }
}

void CenteredMoments(const double* x, const double* y, std::size_t rows,
                     std::size_t cols, const double* mean_x,
                     const double* mean_y, double* sxx, double* syy,
                     double* sxy) {
  const std::size_t vec_cols = cols & ~std::size_t{3};
  for (std::size_t c = 0; c < cols; ++c) sxx[c] = syy[c] = sxy[c] = 0.0;
  for (std::size_t t = 0; t < rows; ++t) {
    const double* rx = x + t * cols;
    const double* ry = y + t * cols;
    std::size_t c = 0;
    for (; c < vec_cols; c += 4) {
      const __m256d dx =
          _mm256_sub_pd(_mm256_loadu_pd(rx + c), _mm256_loadu_pd(mean_x + c));
      const __m256d dy =
          _mm256_sub_pd(_mm256_loadu_pd(ry + c), _mm256_loadu_pd(mean_y + c));
      _mm256_storeu_pd(sxx + c, _mm256_fmadd_pd(dx, dx, _mm256_loadu_pd(sxx + c)));
      _mm256_storeu_pd(syy + c, _mm256_fmadd_pd(dy, dy, _mm256_loadu_pd(syy + c)));
      _mm256_storeu_pd(sxy + c, _mm256_fmadd_pd(dx, dy, _mm256_loadu_pd(sxy + c)));
    }
    for (; c < cols; ++c) {
      const double dx = rx[c] - mean_x[c];
      const double dy = ry[c] - mean_y[c];
      sxx[c] += dx * dx;
      syy[c] += dy * dy;
      sxy[c] += dx * dy;
    }
  }
}

}  // namespace

const MetricKernels& Avx2KernelTable() {
  static const MetricKernels kernels{
      "avx2",     WrappedDiffSums, WrappedDiffSqDev, PointDistanceSum,
      DiffAbsSum, ColumnSums,      CenteredMoments,
  };
  return kernels;
}

}  // namespace kinepipe::simd

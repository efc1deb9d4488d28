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

#include <cstdlib>
#include <string_view>

#include "kinepipe/simd/kernels.h"

namespace kinepipe::simd {

#if defined(KINEPIPE_HAVE_AVX2)
const MetricKernels& Avx2KernelTable();  // kernels_avx2.cc
#endif

const MetricKernels* Avx2Kernels() {
#if defined(KINEPIPE_HAVE_AVX2)
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &Avx2KernelTable() : nullptr;
#else
  return nullptr;
#endif
}

const MetricKernels& ActiveKernels() {
  static const MetricKernels* active = [] {
    const char* env = std::getenv("KINEPIPE_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") {
      return &ScalarKernels();
    }
    const MetricKernels* avx2 = Avx2Kernels();
    return avx2 != nullptr ? avx2 : &ScalarKernels();
  }();
  return *active;
}

}  // namespace kinepipe::simd

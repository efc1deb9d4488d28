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

#ifndef KINEPIPE_SRC_SIMD_WRAP_H_
#define KINEPIPE_SRC_SIMD_WRAP_H_

#include <cmath>
#include <numbers>

namespace kinepipe::simd {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInvTwoPi = 1.0 / kTwoPi;

// Maps an angle difference to (-pi, pi].
inline double WrapAngle(double d) {
  return d - kTwoPi * std::ceil((d - std::numbers::pi) * kInvTwoPi);
}

}  // namespace kinepipe::simd

#endif  // KINEPIPE_SRC_SIMD_WRAP_H_

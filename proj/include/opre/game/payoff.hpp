// Copyright 2026 The OPRE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPRE_GAME_PAYOFF_HPP_
#define OPRE_GAME_PAYOFF_HPP_

#include <array>
#include <stdexcept>

#include "opre/game/types.hpp"

namespace opre {

// Rock-paper-scissors payoff: antisymmetric, row order (rock, paper,
// scissors), scaled by 100.
struct PayoffMatrix {
  static constexpr int kScale = 100;
  // M[i][j] * kScale is the row player's payoff for pure i vs pure j.
  static constexpr std::array<std::array<int, 3>, 3> kSigns = {{
      {{0, -1, 1}},
      {{1, 0, -1}},
      {{-1, 1, 0}},
  }};
  static constexpr int At(int i, int j) { return kScale * kSigns[i][j]; }
};

// r0 = (v0/|v0|) M (v1/|v1|)^T with L1 normalization, so inventories act as
// mixed strategies and pure inventories score exactly +-100.
inline double ComputePayoff(const Inventory& v0, const Inventory& v1) {
  const int n0 = v0.L1Norm();
  const int n1 = v1.L1Norm();
  if (n0 <= 0 || n1 <= 0) {
    throw std::domain_error("ComputePayoff: zero-norm inventory");
  }
  // Integer bilinear form first; one exact division at the end keeps
  // antisymmetry bit-exact under argument swap.
  long long acc = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      acc += static_cast<long long>(PayoffMatrix::At(i, j)) * v0.counts[i] * v1.counts[j];
    }
  }
  return static_cast<double>(acc) / (static_cast<double>(n0) * static_cast<double>(n1));
}

}  // namespace opre

#endif  // OPRE_GAME_PAYOFF_HPP_

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

#include <cmath>

#include <catch_amalgamated.hpp>

#include "opre/eval/nash.hpp"
#include "opre/util/rng.hpp"

namespace opre {
namespace {

PayoffTable ScaledRps(double scale) {
  return {{0.0, -scale, scale}, {scale, 0.0, -scale}, {-scale, scale, 0.0}};
}

TEST_CASE("rock-paper-scissors solves to the uniform mixture") {
  NashResult nash = SolveNash(ScaledRps(100.0), 1e-3);
  REQUIRE(nash.weights.size() == 3);
  for (double w : nash.weights) CHECK(w == Catch::Approx(1.0 / 3.0).margin(1e-3));
  CHECK(nash.exploitability <= 1e-3);
}

TEST_CASE("a dominant row takes all the weight") {
  // Row 1 beats everyone.
  const PayoffTable a = {{0.0, -2.0, 1.0}, {2.0, 0.0, 3.0}, {-1.0, -3.0, 0.0}};
  NashResult nash = SolveNash(a, 1e-3);
  CHECK(nash.weights[1] == Catch::Approx(1.0).margin(2e-3));
  CHECK(nash.exploitability <= 1e-3);
}

TEST_CASE("2x2 antisymmetric game is decided by the sign") {
  const PayoffTable a = {{0.0, 1.5}, {-1.5, 0.0}};
  NashResult nash = SolveNash(a, 1e-3);
  CHECK(nash.weights[0] == Catch::Approx(1.0).margin(2e-3));
  CHECK(nash.exploitability <= 1e-3);
}

TEST_CASE("the all-zero game returns uniform with zero exploitability") {
  const PayoffTable a = {{0.0, 0.0}, {0.0, 0.0}};
  NashResult nash = SolveNash(a);
  CHECK(nash.weights[0] == 0.5);
  CHECK(nash.weights[1] == 0.5);
  CHECK(nash.exploitability == 0.0);
}

TEST_CASE("invalid matrices are rejected") {
  CHECK_THROWS_AS(SolveNash({{0.0, 1.0}, {1.0, 0.0}}), std::domain_error);
  CHECK_THROWS_AS(SolveNash({{0.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(SolveNash({}), std::invalid_argument);
  CHECK_THROWS_AS(SolveNash(ScaledRps(1.0), 0.0), std::invalid_argument);
}

TEST_CASE("every emitted solution meets the exploitability bound") {
  Rng rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    const size_t n = 3 + static_cast<size_t>(trial % 3) * 2;  // odd sizes: 3, 5, 7
    PayoffTable a(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        a[i][j] = rng.UniformDouble(-10.0, 10.0);
        a[j][i] = -a[i][j];
      }
    }
    NashResult nash = SolveNash(a, 1e-3);
    CHECK(nash.exploitability <= 1e-3);
    CHECK(Exploitability(a, nash.weights) <= 1e-3);
    double sum = 0.0;
    for (double w : nash.weights) {
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("effective diversity of scaled RPS under uniform play") {
  const std::vector<double> uniform(3, 1.0 / 3.0);
  CHECK(EffectiveDiversity(ScaledRps(100.0), uniform) == Catch::Approx(100.0 / 3.0).margin(1e-9));
}

TEST_CASE("one-hot weights give exactly zero diversity") {
  const PayoffTable a = {{0.0, -2.0, 1.0}, {2.0, 0.0, 3.0}, {-1.0, -3.0, 0.0}};
  CHECK(EffectiveDiversity(a, {0.0, 1.0, 0.0}) == 0.0);
  CHECK(EffectiveDiversity({{0.0, 0.0}, {0.0, 0.0}}, {0.5, 0.5}) == 0.0);
}

TEST_CASE("diversity is nonnegative and size-checked") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    PayoffTable a(4, std::vector<double>(4));
    std::vector<double> p = {0.1, 0.2, 0.3, 0.4};
    for (auto& row : a) {
      for (double& v : row) v = rng.UniformDouble(-5.0, 5.0);
    }
    CHECK(EffectiveDiversity(a, p) >= 0.0);
  }
  CHECK_THROWS_AS(EffectiveDiversity(ScaledRps(1.0), {0.5, 0.5}), std::invalid_argument);
}

}  // namespace
}  // namespace opre

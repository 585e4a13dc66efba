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

#ifndef OPRE_EVAL_NASH_HPP_
#define OPRE_EVAL_NASH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace opre {

using PayoffTable = std::vector<std::vector<double>>;

inline void CheckSquare(const PayoffTable& a) {
  if (a.empty()) throw std::invalid_argument("payoff matrix: empty");
  for (const auto& row : a) {
    if (row.size() != a.size()) throw std::invalid_argument("payoff matrix: not square");
  }
}

inline void CheckAntisymmetric(const PayoffTable& a, double tolerance = 1e-9) {
  CheckSquare(a);
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = 0; j < a.size(); ++j) {
      if (std::abs(a[i][j] + a[j][i]) > tolerance) {
        throw std::domain_error("payoff matrix: not antisymmetric");
      }
    }
  }
}

// max_i (A p)_i. For an antisymmetric game the value is 0, so this is how
// much an adversary can gain against p.
inline double Exploitability(const PayoffTable& a, const std::vector<double>& p) {
  double worst = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < a.size(); ++i) {
    double u = 0.0;
    for (size_t j = 0; j < a.size(); ++j) u += a[i][j] * p[j];
    worst = std::max(worst, u);
  }
  return worst;
}

struct NashResult {
  std::vector<double> weights;
  double exploitability = 0.0;
  int64_t iterations = 0;
};

// Maximin strategy of the symmetric zero-sum meta-game by multiplicative
// weights in self-play, with the optimistic (last-utility extrapolation)
// update so the iterates themselves converge instead of cycling. Both the
// current iterate and the running average are candidate solutions; whichever
// first reaches exploitability <= epsilon is returned.
inline NashResult SolveNash(const PayoffTable& a, double epsilon = 1e-3,
                            int64_t max_iterations = 1000000) {
  CheckAntisymmetric(a, 1e-9);
  if (!(epsilon > 0.0)) throw std::invalid_argument("SolveNash: epsilon must be positive");
  const size_t n = a.size();

  double scale = 0.0;
  for (const auto& row : a) {
    for (double v : row) scale = std::max(scale, std::abs(v));
  }
  NashResult result;
  result.weights.assign(n, 1.0 / static_cast<double>(n));
  if (scale == 0.0) {
    result.exploitability = 0.0;
    return result;  // the all-zero game: uniform is exact
  }
  const double eta = 0.25 / scale;

  std::vector<double> log_w(n, 0.0);
  std::vector<double> p(n, 1.0 / static_cast<double>(n));
  std::vector<double> u(n, 0.0), u_prev(n, 0.0);
  std::vector<double> mean(n, 0.0);

  for (int64_t t = 1; t <= max_iterations; ++t) {
    for (size_t i = 0; i < n; ++i) {
      u[i] = 0.0;
      for (size_t j = 0; j < n; ++j) u[i] += a[i][j] * p[j];
    }
    for (size_t i = 0; i < n; ++i) {
      mean[i] += (p[i] - mean[i]) / static_cast<double>(t);
    }

    const double e_cur = *std::max_element(u.begin(), u.end());
    if (e_cur <= epsilon) {
      result.weights = p;
      result.exploitability = e_cur;
      result.iterations = t;
      return result;
    }
    if (t % 64 == 0) {
      const double e_mean = Exploitability(a, mean);
      if (e_mean <= epsilon) {
        result.weights = mean;
        result.exploitability = e_mean;
        result.iterations = t;
        return result;
      }
    }

    double max_log = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i) {
      log_w[i] += eta * (2.0 * u[i] - u_prev[i]);
      max_log = std::max(max_log, log_w[i]);
    }
    double z = 0.0;
    for (size_t i = 0; i < n; ++i) {
      p[i] = std::exp(log_w[i] - max_log);
      z += p[i];
    }
    for (size_t i = 0; i < n; ++i) p[i] /= z;
    u_prev = u;
  }
  throw std::runtime_error("SolveNash: exploitability target not reached within iteration cap");
}

// Nash-weighted rectified payoff: sum_ij p_i max(A_ij, 0) p_j. Zero exactly
// when one agent dominates (its column is the only support and is
// non-positive elsewhere).
inline double EffectiveDiversity(const PayoffTable& a, const std::vector<double>& p) {
  CheckSquare(a);
  if (p.size() != a.size()) throw std::invalid_argument("EffectiveDiversity: size mismatch");
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = 0; j < a.size(); ++j) {
      d += p[i] * std::max(a[i][j], 0.0) * p[j];
    }
  }
  return d;
}

}  // namespace opre

#endif  // OPRE_EVAL_NASH_HPP_

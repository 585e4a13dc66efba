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

#ifndef OPRE_EVAL_STATS_HPP_
#define OPRE_EVAL_STATS_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace opre {

// Regularized upper incomplete gamma Q(s, x), via the series for x < s + 1
// and the Lentz continued fraction otherwise.
inline double RegularizedGammaQ(double s, double x) {
  if (s <= 0.0 || x < 0.0) throw std::invalid_argument("RegularizedGammaQ: bad arguments");
  if (x == 0.0) return 1.0;
  const double log_gamma_s = std::lgamma(s);
  if (x < s + 1.0) {
    // P(s, x) series; Q = 1 - P.
    double term = 1.0 / s;
    double sum = term;
    double ap = s;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    const double p = sum * std::exp(-x + s * std::log(x) - log_gamma_s);
    return 1.0 - p;
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return std::exp(-x + s * std::log(x) - log_gamma_s) * h;
}

// Upper-tail p-value of a chi-square statistic.
inline double ChiSquarePValue(double statistic, int dof) {
  if (dof <= 0) throw std::invalid_argument("ChiSquarePValue: dof must be positive");
  if (statistic <= 0.0) return 1.0;
  return RegularizedGammaQ(0.5 * dof, 0.5 * statistic);
}

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Pearson chi-square test of homogeneity on a contingency table (rows are
// groups, columns are categories). Columns with zero total are dropped from
// the degrees of freedom.
inline ChiSquareResult ChiSquareTest(const std::vector<std::vector<int64_t>>& table) {
  const size_t rows = table.size();
  if (rows < 2) throw std::invalid_argument("ChiSquareTest: need at least two rows");
  const size_t cols = table[0].size();
  for (const auto& row : table) {
    if (row.size() != cols || cols < 2) throw std::invalid_argument("ChiSquareTest: bad table");
    for (int64_t v : row) {
      if (v < 0) throw std::invalid_argument("ChiSquareTest: negative count");
    }
  }
  std::vector<double> row_totals(rows, 0.0), col_totals(cols, 0.0);
  double total = 0.0;
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) {
      row_totals[r] += static_cast<double>(table[r][c]);
      col_totals[c] += static_cast<double>(table[r][c]);
      total += static_cast<double>(table[r][c]);
    }
  }
  if (total <= 0.0) throw std::invalid_argument("ChiSquareTest: empty table");

  ChiSquareResult result;
  size_t effective_cols = 0;
  for (size_t c = 0; c < cols; ++c) {
    if (col_totals[c] > 0.0) ++effective_cols;
  }
  size_t effective_rows = 0;
  for (size_t r = 0; r < rows; ++r) {
    if (row_totals[r] > 0.0) ++effective_rows;
  }
  if (effective_cols < 2 || effective_rows < 2) {
    result.dof = 1;
    result.p_value = 1.0;
    return result;
  }
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) {
      const double expected = row_totals[r] * col_totals[c] / total;
      if (expected <= 0.0) continue;
      const double diff = static_cast<double>(table[r][c]) - expected;
      result.statistic += diff * diff / expected;
    }
  }
  result.dof = static_cast<int>((effective_rows - 1) * (effective_cols - 1));
  result.p_value = ChiSquarePValue(result.statistic, result.dof);
  return result;
}

}  // namespace opre

#endif  // OPRE_EVAL_STATS_HPP_

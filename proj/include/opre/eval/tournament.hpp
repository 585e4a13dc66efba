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

#ifndef OPRE_EVAL_TOURNAMENT_HPP_
#define OPRE_EVAL_TOURNAMENT_HPP_

#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "opre/eval/nash.hpp"
#include "opre/eval/policy.hpp"
#include "opre/harness/episode.hpp"

namespace opre {

// Fresh policy instances per episode side; policies are stateful, so a cell
// (and a diagonal in particular) needs independent instances.
using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

struct MetaGame {
  std::vector<std::string> ids;
  PayoffTable payoff;     // antisymmetrized mean returns, row vs column
  double raw_asymmetry = 0.0;  // max |raw_ij + raw_ji|, a sampling-noise diagnostic
  int episodes_per_cell = 0;
};

// Every unordered pair plays episodes_per_cell episodes per seat order; cell
// (i, j) is i's mean return against j. Exact zero-sum antisymmetry is then
// enforced by averaging A with -A^T; the pre-averaging residual is reported.
inline MetaGame RoundRobin(const GridConfig& config, const std::vector<PolicyFactory>& factories,
                           int episodes_per_cell, uint64_t seed) {
  if (factories.size() < 1) throw std::invalid_argument("RoundRobin: need at least one policy");
  if (episodes_per_cell <= 0) throw std::invalid_argument("RoundRobin: episodes must be positive");
  if (config.num_players != 2) {
    throw std::invalid_argument("RoundRobin: tournament presets are two-player");
  }
  const size_t n = factories.size();
  MetaGame meta;
  meta.episodes_per_cell = episodes_per_cell;
  for (const PolicyFactory& factory : factories) meta.ids.push_back(factory()->Id());

  // Each ordered cell gets its own episodes (seat order alternating within
  // the cell), so raw_ij + raw_ji measures pure sampling noise.
  PayoffTable raw(n, std::vector<double>(n, 0.0));
  Rng rng(seed);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      std::unique_ptr<Policy> row_policy = factories[i]();
      std::unique_ptr<Policy> col_policy = factories[j]();
      double sum_i = 0.0;
      for (int e = 0; e < episodes_per_cell; ++e) {
        std::vector<SeatSpec> seats(2);
        const size_t row_seat = static_cast<size_t>(e % 2);
        seats[row_seat].policy = row_policy.get();
        seats[1 - row_seat].policy = col_policy.get();
        EpisodeStats stats = PlayEpisode(config, rng.NextU64(), seats);
        sum_i += stats.returns[row_seat];
      }
      raw[i][j] = sum_i / episodes_per_cell;
    }
  }

  meta.raw_asymmetry = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i; j < n; ++j) {
      meta.raw_asymmetry = std::max(meta.raw_asymmetry, std::abs(raw[i][j] + raw[j][i]));
    }
  }
  meta.payoff.assign(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      meta.payoff[i][j] = 0.5 * (raw[i][j] - raw[j][i]);
    }
  }
  return meta;
}

inline void WriteMetaGameCsv(const MetaGame& meta, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("WriteMetaGameCsv: cannot open " + path);
  out << "policy";
  for (const std::string& id : meta.ids) out << "," << id;
  out << "\n";
  for (size_t i = 0; i < meta.ids.size(); ++i) {
    out << meta.ids[i];
    for (size_t j = 0; j < meta.ids.size(); ++j) out << "," << meta.payoff[i][j];
    out << "\n";
  }
}

}  // namespace opre

#endif  // OPRE_EVAL_TOURNAMENT_HPP_

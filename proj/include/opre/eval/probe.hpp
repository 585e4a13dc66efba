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

#ifndef OPRE_EVAL_PROBE_HPP_
#define OPRE_EVAL_PROBE_HPP_

#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "opre/eval/policy.hpp"
#include "opre/eval/scripted.hpp"
#include "opre/eval/stats.hpp"
#include "opre/harness/episode.hpp"

namespace opre {

// Statistics of rollouts with behavioral control handed to a single option:
// per (option, opponent strategy) cell, means over the cell's episodes plus
// the raw pickup counts for distribution tests.
struct ProbeCell {
  int option = 0;
  ResourceKind opponent = ResourceKind::kRock;
  double mean_length = 0.0;
  double mean_tagging_events = 0.0;
  double mean_reward = 0.0;
  std::array<double, 3> mean_collected = {0.0, 0.0, 0.0};
  double mean_scouting = 0.0;  // steps with the opponent inside the window
  std::array<int64_t, 3> pickup_counts = {0, 0, 0};
};

struct OptionProbeReport {
  int num_options = 0;
  int episodes_per_cell = 0;
  std::vector<ProbeCell> cells;  // option-major, opponents in kind order

  const ProbeCell& At(int option, ResourceKind opponent) const {
    return cells[static_cast<size_t>(option) * kNumResourceKinds +
                 static_cast<size_t>(opponent)];
  }

  // Pickup distribution per option, pooled over opponents.
  std::vector<std::array<int64_t, 3>> PooledPickups() const {
    std::vector<std::array<int64_t, 3>> pooled(static_cast<size_t>(num_options), {0, 0, 0});
    for (const ProbeCell& cell : cells) {
      for (int k = 0; k < 3; ++k) {
        pooled[static_cast<size_t>(cell.option)][static_cast<size_t>(k)] +=
            cell.pickup_counts[static_cast<size_t>(k)];
      }
    }
    return pooled;
  }
};

// Rolls out force_option(z) for every option against each scripted pure
// strategy. The forced option bypasses the p head entirely.
inline OptionProbeReport RunOptionProbe(const GridConfig& config, const OpreConfig& net_config,
                                        AgentVariant variant, ParamSnapshot params,
                                        int episodes_per_cell = 100, uint64_t seed = 1,
                                        int opponent_collect_target = 5) {
  if (!IsOpreFamily(variant)) {
    throw std::invalid_argument("RunOptionProbe: checkpoint is not an OPRE variant");
  }
  if (episodes_per_cell <= 0) {
    throw std::invalid_argument("RunOptionProbe: episodes must be positive");
  }
  OptionProbeReport report;
  report.num_options = net_config.num_options;
  report.episodes_per_cell = episodes_per_cell;

  for (int z = 0; z < net_config.num_options; ++z) {
    for (int k = 0; k < kNumResourceKinds; ++k) {
      const auto opponent_kind = static_cast<ResourceKind>(k);
      NetworkPolicy agent("probe", variant, net_config, params);
      agent.SetForcedOption(z);
      std::vector<ScriptedBot> bots(static_cast<size_t>(config.num_players - 1),
                                    ScriptedBot(opponent_kind, opponent_collect_target));

      ProbeCell cell;
      cell.option = z;
      cell.opponent = opponent_kind;
      Rng rng(seed ^ (0x517cc1b727220a95ull * static_cast<uint64_t>(z * 3 + k + 1)));
      for (int e = 0; e < episodes_per_cell; ++e) {
        std::vector<SeatSpec> seats(static_cast<size_t>(config.num_players));
        seats[0].policy = &agent;
        for (int s = 1; s < config.num_players; ++s) {
          seats[static_cast<size_t>(s)].policy = &bots[static_cast<size_t>(s - 1)];
        }
        EpisodeStats stats = PlayEpisode(config, rng.NextU64(), seats);
        cell.mean_length += stats.length;
        cell.mean_tagging_events += stats.confrontations[0];
        cell.mean_reward += stats.returns[0];
        cell.mean_scouting += stats.scouting_steps[0];
        for (int r = 0; r < 3; ++r) {
          cell.mean_collected[static_cast<size_t>(r)] += stats.pickups[0][r];
          cell.pickup_counts[static_cast<size_t>(r)] += stats.pickups[0][r];
        }
      }
      cell.mean_length /= episodes_per_cell;
      cell.mean_tagging_events /= episodes_per_cell;
      cell.mean_reward /= episodes_per_cell;
      cell.mean_scouting /= episodes_per_cell;
      for (int r = 0; r < 3; ++r) cell.mean_collected[static_cast<size_t>(r)] /= episodes_per_cell;
      report.cells.push_back(cell);
    }
  }
  return report;
}

// One row per option x opponent x statistic, for heatmap plotting.
inline void WriteProbeCsv(const OptionProbeReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("WriteProbeCsv: cannot open " + path);
  out << "option,opponent,statistic,value\n";
  for (const ProbeCell& cell : report.cells) {
    const std::string prefix =
        std::to_string(cell.option) + "," + ResourceName(cell.opponent) + ",";
    out << prefix << "episode_length," << cell.mean_length << "\n";
    out << prefix << "tagging_events," << cell.mean_tagging_events << "\n";
    out << prefix << "reward," << cell.mean_reward << "\n";
    for (int k = 0; k < 3; ++k) {
      out << prefix << "collected_" << ResourceName(static_cast<ResourceKind>(k)) << ","
          << cell.mean_collected[static_cast<size_t>(k)] << "\n";
    }
    out << prefix << "scouting," << cell.mean_scouting << "\n";
  }
}

// Smallest pairwise p-value of a chi-square homogeneity test between any two
// options' pooled resource-pickup distributions.
inline double BestOptionSeparationPValue(const OptionProbeReport& report) {
  const auto pooled = report.PooledPickups();
  double best = 1.0;
  for (size_t a = 0; a < pooled.size(); ++a) {
    for (size_t b = a + 1; b < pooled.size(); ++b) {
      const int64_t total_a = pooled[a][0] + pooled[a][1] + pooled[a][2];
      const int64_t total_b = pooled[b][0] + pooled[b][1] + pooled[b][2];
      if (total_a == 0 || total_b == 0) continue;
      const std::vector<std::vector<int64_t>> table = {
          {pooled[a][0], pooled[a][1], pooled[a][2]},
          {pooled[b][0], pooled[b][1], pooled[b][2]}};
      best = std::min(best, ChiSquareTest(table).p_value);
    }
  }
  return best;
}

}  // namespace opre

#endif  // OPRE_EVAL_PROBE_HPP_

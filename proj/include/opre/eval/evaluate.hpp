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

#ifndef OPRE_EVAL_EVALUATE_HPP_
#define OPRE_EVAL_EVALUATE_HPP_

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "opre/eval/policy.hpp"
#include "opre/harness/episode.hpp"

namespace opre {

struct HoldoutEvalResult {
  int episodes = 0;
  double mean_return = 0.0;
  // Single-confrontation games: P(victory), timeouts counting 0.5 for both
  // sides. Multi-confrontation games: mean victories per episode.
  double win_rate = 0.0;
  double mean_length = 0.0;
  std::array<double, 3> pickup_fractions = {0.0, 0.0, 0.0};
  double mean_pickups = 0.0;
  std::vector<double> per_episode_returns;
  std::vector<uint64_t> episode_seeds;  // replay-capable
};

// Plays `agent` against opponents drawn uniformly per episode, behavior
// policy sampled, environment reward only (never pseudorewards).
inline HoldoutEvalResult EvaluateVsOpponents(const GridConfig& config, Policy& agent,
                                             const std::vector<Policy*>& opponents, int episodes,
                                             uint64_t seed) {
  if (episodes <= 0) throw std::invalid_argument("EvaluateVsOpponents: episodes must be positive");
  if (static_cast<int>(opponents.size()) < config.num_players - 1) {
    throw std::invalid_argument(
        "EvaluateVsOpponents: need a distinct opponent instance per non-agent seat");
  }
  for (Policy* opponent : opponents) {
    if (opponent == &agent) {
      throw std::invalid_argument("EvaluateVsOpponents: opponent aliases the agent");
    }
  }

  Rng rng(seed);
  HoldoutEvalResult result;
  result.episodes = episodes;
  double wins = 0.0;
  std::array<int64_t, 3> pickups = {0, 0, 0};

  for (int e = 0; e < episodes; ++e) {
    const uint64_t episode_seed = rng.NextU64();
    result.episode_seeds.push_back(episode_seed);
    std::vector<SeatSpec> seats(static_cast<size_t>(config.num_players));
    const int agent_seat = rng.UniformIndex(config.num_players);
    const std::vector<int> order = rng.Permutation(static_cast<int>(opponents.size()));
    size_t next_opponent = 0;
    for (int s = 0; s < config.num_players; ++s) {
      if (s == agent_seat) {
        seats[static_cast<size_t>(s)].policy = &agent;
      } else {
        seats[static_cast<size_t>(s)].policy =
            opponents[static_cast<size_t>(order[next_opponent++])];
      }
    }
    EpisodeStats stats = PlayEpisode(config, episode_seed, seats);
    const size_t a = static_cast<size_t>(agent_seat);
    result.mean_return += stats.returns[a];
    result.per_episode_returns.push_back(stats.returns[a]);
    result.mean_length += stats.length;
    for (int k = 0; k < 3; ++k) pickups[static_cast<size_t>(k)] += stats.pickups[a][k];

    if (config.terminate_on_tag) {
      // Timeouts (and exact draws) count half for both sides.
      const double r = stats.returns[a];
      wins += r > 0.0 ? 1.0 : (r == 0.0 ? 0.5 : 0.0);
    } else {
      wins += stats.victories[a];
    }
  }

  result.mean_return /= episodes;
  result.mean_length /= episodes;
  result.win_rate = wins / episodes;
  const double total_pickups =
      static_cast<double>(pickups[0]) + static_cast<double>(pickups[1]) +
      static_cast<double>(pickups[2]);
  result.mean_pickups = total_pickups / episodes;
  if (total_pickups > 0.0) {
    for (int k = 0; k < 3; ++k) {
      result.pickup_fractions[static_cast<size_t>(k)] =
          static_cast<double>(pickups[static_cast<size_t>(k)]) / total_pickups;
    }
  }
  return result;
}

}  // namespace opre

#endif  // OPRE_EVAL_EVALUATE_HPP_

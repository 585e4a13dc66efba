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

#ifndef OPRE_HARNESS_EPISODE_HPP_
#define OPRE_HARNESS_EPISODE_HPP_

#include <array>
#include <functional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "opre/eval/policy.hpp"
#include "opre/game/replay.hpp"
#include "opre/game/state.hpp"
#include "opre/learn/trajectory.hpp"

namespace opre {

// Training-only reward shaping at pickup events. Evaluation never applies it.
struct PseudorewardSpec {
  ResourceKind target = ResourceKind::kRock;
  double pickup_bonus = 10.0;
  double off_target_penalty = -5.0;
  bool enabled = false;

  double At(ResourceKind kind) const {
    if (!enabled) return 0.0;
    return kind == target ? pickup_bonus : off_target_penalty;
  }
};

using TrajectorySink = std::function<void(Trajectory&&)>;

struct SeatSpec {
  Policy* policy = nullptr;
  // Set for learning seats: slices of this length go to `sink`. The policy
  // must then be a NetworkPolicy so the recurrent state can be recorded.
  TrajectorySink sink;
  NetworkPolicy* actor = nullptr;
  int unroll_length = 100;
  bool record_concealed = false;
  PseudorewardSpec pseudoreward;
  // Called at each slice boundary (including the episode start) so the actor
  // can refresh its parameter snapshot.
  std::function<void(NetworkPolicy&)> on_slice_start;
};

struct EpisodeStats {
  int length = 0;
  bool timeout = false;  // ended by the step limit, not a confrontation
  std::vector<double> returns;           // environment reward only
  std::vector<double> training_returns;  // including pseudorewards
  std::vector<std::array<int, 3>> pickups;
  std::vector<int> confrontations;  // events this seat took part in
  std::vector<int> victories;       // confrontations won (positive payoff)
  std::vector<int> scouting_steps;  // steps with an opponent in the window
};

namespace episode_detail {

// Accumulates one seat's slice and flushes it through the sink.
class SliceRecorder {
 public:
  SliceRecorder(const SeatSpec& seat, int player) : seat_(seat), player_(player) {}

  void StartSlice(uint64_t version) {
    trajectory_ = Trajectory();
    trajectory_.behavior_version = version;
    const LstmState<float>& state = seat_.actor->state();
    trajectory_.initial_h.assign(state.h.data.begin(), state.h.data.end());
    trajectory_.initial_c.assign(state.c.data.begin(), state.c.data.end());
  }

  void RecordPreStep(const GameState& game) {
    trajectory_.observations.push_back(game.RenderObservation(player_));
    if (seat_.record_concealed) {
      trajectory_.concealed.push_back(game.ConcealedObservation(player_));
    }
  }

  void RecordPostStep(const GameState& game, int action, double behavior_prob, double reward) {
    trajectory_.actions.push_back(action);
    trajectory_.behavior_probs.push_back(behavior_prob);
    trajectory_.rewards.push_back(reward);
    const bool full = trajectory_.Length() >= static_cast<size_t>(seat_.unroll_length);
    if (game.terminated() || full) {
      trajectory_.terminal = game.terminated();
      trajectory_.bootstrap_obs = game.RenderObservation(player_);
      if (seat_.record_concealed) {
        trajectory_.bootstrap_concealed = game.ConcealedObservation(player_);
      }
      seat_.sink(std::move(trajectory_));
      if (!game.terminated()) {
        if (seat_.on_slice_start) seat_.on_slice_start(*seat_.actor);
        StartSlice(seat_.actor->param_version());
      }
    }
  }

 private:
  const SeatSpec& seat_;
  int player_;
  Trajectory trajectory_;
};

}  // namespace episode_detail

// Plays one full episode. Each seat draws actions from its own generator
// derived from `seed`, so seat behavior is independent of seat count and
// order. Trajectory slices for learning seats go to their sinks as they fill.
inline EpisodeStats PlayEpisode(const GridConfig& config, uint64_t seed,
                                std::span<SeatSpec> seats, ReplayWriter* replay = nullptr) {
  const int n = config.num_players;
  if (static_cast<int>(seats.size()) != n) {
    throw std::invalid_argument("PlayEpisode: one seat per player required");
  }
  GameState game = GameState::Reset(config, seed);

  std::vector<Rng> rngs;
  rngs.reserve(static_cast<size_t>(n));
  std::vector<episode_detail::SliceRecorder> recorders;
  for (int i = 0; i < n; ++i) {
    rngs.emplace_back(seed ^ (0x9e3779b97f4a7c15ull * static_cast<uint64_t>(i + 1)));
    SeatSpec& seat = seats[static_cast<size_t>(i)];
    if (seat.sink && seat.actor == nullptr) {
      throw std::invalid_argument("PlayEpisode: trajectory sink requires a network actor");
    }
    for (int other = 0; other < i; ++other) {
      if (seats[static_cast<size_t>(other)].policy == seat.policy) {
        // Policies are stateful; sharing an instance across seats would share
        // its memory and recurrent state.
        throw std::invalid_argument("PlayEpisode: one policy instance per seat");
      }
    }
    seat.policy->BeginEpisode(config);
    recorders.emplace_back(seat, i);
    if (seat.sink) {
      if (seat.on_slice_start) seat.on_slice_start(*seat.actor);
      recorders.back().StartSlice(seat.actor->param_version());
    }
  }

  EpisodeStats stats;
  stats.returns.assign(static_cast<size_t>(n), 0.0);
  stats.training_returns.assign(static_cast<size_t>(n), 0.0);
  stats.pickups.assign(static_cast<size_t>(n), {0, 0, 0});
  stats.confrontations.assign(static_cast<size_t>(n), 0);
  stats.victories.assign(static_cast<size_t>(n), 0);
  stats.scouting_steps.assign(static_cast<size_t>(n), 0);

  std::vector<Action> actions(static_cast<size_t>(n), Action::kNoOp);
  std::vector<double> behavior_probs(static_cast<size_t>(n), 1.0);
  std::vector<std::vector<double>> option_weights(static_cast<size_t>(n));

  while (!game.terminated()) {
    for (int i = 0; i < n; ++i) {
      const size_t s = static_cast<size_t>(i);
      SeatSpec& seat = seats[s];
      const PlayerState& player = game.players()[s];
      SelfView view{game.RenderObservation(i), player.position, player.orientation};
      for (CellCode code : view.obs.window) {
        if (code == CellCode::kOtherPlayer) {
          ++stats.scouting_steps[s];
          break;
        }
      }
      if (seat.sink) recorders[s].RecordPreStep(game);
      PolicyStep step = seat.policy->Act(view, rngs[s]);
      actions[s] = step.action;
      behavior_probs[s] = step.behavior_prob;
      option_weights[s] = std::move(step.option_weights);
    }

    StepOutcome outcome = game.Step(actions);

    std::vector<double> training_rewards = outcome.rewards;
    for (const Event& event : outcome.events) {
      if (const auto* pickup = std::get_if<PickupEvent>(&event)) {
        const size_t s = static_cast<size_t>(pickup->player);
        ++stats.pickups[s][static_cast<int>(pickup->kind)];
        training_rewards[s] += seats[s].pseudoreward.At(pickup->kind);
      } else {
        const auto& conf = std::get<ConfrontationEvent>(event);
        ++stats.confrontations[static_cast<size_t>(conf.tagger)];
        ++stats.confrontations[static_cast<size_t>(conf.tagged)];
        if (conf.reward > 0.0) ++stats.victories[static_cast<size_t>(conf.tagger)];
        if (conf.reward < 0.0) ++stats.victories[static_cast<size_t>(conf.tagged)];
      }
    }

    for (int i = 0; i < n; ++i) {
      const size_t s = static_cast<size_t>(i);
      stats.returns[s] += outcome.rewards[s];
      stats.training_returns[s] += training_rewards[s];
      if (seats[s].sink) {
        recorders[s].RecordPostStep(game, static_cast<int>(actions[s]), behavior_probs[s],
                                    training_rewards[s]);
      }
    }

    if (replay != nullptr) {
      ReplayStep step;
      step.actions = actions;
      step.events = outcome.events;
      step.option_weights = option_weights;
      replay->Append(step);
    }
    ++stats.length;
  }

  bool any_confrontation = false;
  for (int c : stats.confrontations) any_confrontation |= (c > 0);
  stats.timeout = !any_confrontation && stats.length >= config.episode_limit;
  return stats;
}

}  // namespace opre

#endif  // OPRE_HARNESS_EPISODE_HPP_

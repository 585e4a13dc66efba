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

#ifndef OPRE_GAME_STATE_HPP_
#define OPRE_GAME_STATE_HPP_

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "opre/game/payoff.hpp"
#include "opre/game/types.hpp"
#include "opre/util/rng.hpp"

namespace opre {

// Grid directions; rows grow downward.
inline constexpr std::array<Cell, 4> kDirection = {{
    {-1, 0},  // north
    {0, 1},   // east
    {1, 0},   // south
    {0, -1},  // west
}};

inline Cell ForwardOf(Orientation o) { return kDirection[static_cast<int>(o)]; }
inline Cell RightOf(Orientation o) { return kDirection[(static_cast<int>(o) + 1) % 4]; }
inline Orientation TurnedLeft(Orientation o) { return static_cast<Orientation>((static_cast<int>(o) + 3) % 4); }
inline Orientation TurnedRight(Orientation o) { return static_cast<Orientation>((static_cast<int>(o) + 1) % 4); }

// One seedable game instance. All randomness flows through the embedded
// generator, so identical (config, seed, actions) give bit-identical streams.
class GameState {
 public:
  static GameState Reset(const GridConfig& config, uint64_t seed) {
    Validate(config);
    GameState state;
    state.config_ = config;
    state.rng_.Seed(seed);
    state.grid_.assign(static_cast<size_t>(config.rows) * config.cols, kNoResource);
    for (const auto& [cell, kind] : config.deterministic_resource_cells) {
      state.ResourceAt(cell) = static_cast<int8_t>(kind);
    }
    for (const Cell& cell : config.random_resource_cells) {
      state.ResourceAt(cell) = static_cast<int8_t>(state.rng_.UniformIndex(kNumResourceKinds));
    }
    state.players_.resize(config.num_players);
    for (auto& player : state.players_) {
      std::vector<Cell> free = state.FreeCells();
      if (free.empty()) throw std::invalid_argument("GameState: no free spawn cell");
      player.position = free[state.rng_.UniformIndex(static_cast<int>(free.size()))];
      player.orientation = static_cast<Orientation>(state.rng_.UniformIndex(4));
      player.inventory = Inventory::Initial();
    }
    return state;
  }

  StepOutcome Step(std::initializer_list<Action> actions) {
    return Step(std::span<const Action>(actions.begin(), actions.size()));
  }

  StepOutcome Step(std::span<const Action> actions) {
    if (terminated_) throw std::logic_error("GameState::Step: episode terminated");
    if (static_cast<int>(actions.size()) != config_.num_players) {
      throw std::invalid_argument("GameState::Step: one action per player required");
    }
    StepOutcome outcome;
    outcome.rewards.assign(config_.num_players, 0.0);

    ProcessRespawns();

    // Per-step random priority order resolves movement conflicts and
    // simultaneous tags.
    std::vector<int> order = rng_.Permutation(config_.num_players);
    for (int idx : order) {
      if (terminated_) break;
      PlayerState& player = players_[idx];
      if (player.frozen_until.has_value()) {
        if (step_count_ < *player.frozen_until) continue;
        player.frozen_until.reset();
      }
      ApplyAction(idx, actions[idx], outcome);
    }

    ++step_count_;
    if (!terminated_ && step_count_ >= config_.episode_limit) terminated_ = true;
    outcome.terminated = terminated_;

    outcome.observations.reserve(config_.num_players);
    for (int i = 0; i < config_.num_players; ++i) {
      outcome.observations.push_back(RenderObservation(i));
    }
    return outcome;
  }

  // Scans the 3x3 area directly in front of the tagger (forward offsets 1..3,
  // lateral offsets -1..1). Returns the nearest player by forward distance,
  // ties broken by lowest player index.
  std::optional<int> ResolveTag(int tagger) const {
    const PlayerState& p = players_[tagger];
    const Cell fwd = ForwardOf(p.orientation);
    const Cell right = RightOf(p.orientation);
    for (int f = 1; f <= 3; ++f) {
      int best = -1;
      for (int l = -1; l <= 1; ++l) {
        const Cell cell{p.position.row + f * fwd.row + l * right.row,
                        p.position.col + f * fwd.col + l * right.col};
        if (!InBounds(cell)) continue;
        int occupant = PlayerAt(cell, tagger);
        if (occupant >= 0 && (best < 0 || occupant < best)) best = occupant;
      }
      if (best >= 0) return best;
    }
    return std::nullopt;
  }

  Observation RenderObservation(int player) const {
    const PlayerState& p = players_[player];
    const Cell fwd = ForwardOf(p.orientation);
    const Cell right = RightOf(p.orientation);
    Observation obs;
    obs.inventory = p.inventory;
    obs.orientation = p.orientation;
    for (int f = 0; f < kWindowForward; ++f) {
      for (int l = -1; l <= kWindowLateral - 2; ++l) {
        const Cell cell{p.position.row + f * fwd.row + l * right.row,
                        p.position.col + f * fwd.col + l * right.col};
        CellCode code = CellCode::kEmpty;
        if (!InBounds(cell)) {
          code = CellCode::kOutOfBounds;
        } else if (PlayerAt(cell, player) >= 0) {
          code = CellCode::kOtherPlayer;
        } else if (ResourceAt(cell) != kNoResource) {
          code = static_cast<CellCode>(static_cast<int>(CellCode::kRock) + ResourceAt(cell));
        }
        obs.window[Observation::Index(f, l)] = code;
      }
    }
    return obs;
  }

  // Observations of all other players, in player-index order. Learner-side
  // only; actors never see these.
  std::vector<Observation> ConcealedObservation(int player) const {
    std::vector<Observation> result;
    result.reserve(config_.num_players - 1);
    for (int i = 0; i < config_.num_players; ++i) {
      if (i != player) result.push_back(RenderObservation(i));
    }
    return result;
  }

  const GridConfig& config() const { return config_; }
  int step_count() const { return step_count_; }
  bool terminated() const { return terminated_; }
  const std::vector<PlayerState>& players() const { return players_; }
  int ResourcesOnGrid() const {
    int n = 0;
    for (int8_t r : grid_) n += (r != kNoResource);
    return n;
  }
  std::optional<ResourceKind> ResourceAtCell(const Cell& cell) const {
    int8_t r = ResourceAt(cell);
    if (r == kNoResource) return std::nullopt;
    return static_cast<ResourceKind>(r);
  }
  int PendingRespawns() const { return static_cast<int>(respawn_queue_.size()); }

  friend bool operator==(const GameState& a, const GameState& b) {
    return a.grid_ == b.grid_ && a.players_ == b.players_ && a.step_count_ == b.step_count_ &&
           a.terminated_ == b.terminated_ && a.rng_ == b.rng_ && a.respawn_queue_ == b.respawn_queue_;
  }

 private:
  static constexpr int8_t kNoResource = -1;

  static void Validate(const GridConfig& config) {
    if (config.rows <= 0 || config.cols <= 0) throw std::invalid_argument("GridConfig: empty grid");
    if (config.num_players < 2) throw std::invalid_argument("GridConfig: need at least 2 players");
    if (config.episode_limit <= 0) throw std::invalid_argument("GridConfig: episode_limit <= 0");
    std::set<std::pair<int, int>> seen;
    auto check = [&](const Cell& cell) {
      if (cell.row < 0 || cell.row >= config.rows || cell.col < 0 || cell.col >= config.cols) {
        throw std::invalid_argument("GridConfig: resource cell out of bounds");
      }
      if (!seen.insert({cell.row, cell.col}).second) {
        throw std::invalid_argument("GridConfig: overlapping resource cells");
      }
    };
    for (const auto& [cell, kind] : config.deterministic_resource_cells) check(cell);
    for (const Cell& cell : config.random_resource_cells) check(cell);
    const int free_cells = config.rows * config.cols - static_cast<int>(seen.size());
    if (config.num_players > free_cells) {
      throw std::invalid_argument("GridConfig: too many players for free cells");
    }
  }

  bool InBounds(const Cell& cell) const {
    return cell.row >= 0 && cell.row < config_.rows && cell.col >= 0 && cell.col < config_.cols;
  }

  int8_t& ResourceAt(const Cell& cell) { return grid_[static_cast<size_t>(cell.row) * config_.cols + cell.col]; }
  int8_t ResourceAt(const Cell& cell) const {
    return grid_[static_cast<size_t>(cell.row) * config_.cols + cell.col];
  }

  int PlayerAt(const Cell& cell, int exclude = -1) const {
    for (int i = 0; i < static_cast<int>(players_.size()); ++i) {
      if (i != exclude && players_[i].position == cell) return i;
    }
    return -1;
  }

  std::vector<Cell> FreeCells() const {
    std::vector<Cell> free;
    for (int r = 0; r < config_.rows; ++r) {
      for (int c = 0; c < config_.cols; ++c) {
        const Cell cell{r, c};
        if (ResourceAt(cell) == kNoResource && PlayerAt(cell) < 0) free.push_back(cell);
      }
    }
    return free;
  }

  void ProcessRespawns() {
    while (!respawn_queue_.empty() && respawn_queue_.front() <= step_count_) {
      std::vector<Cell> free = FreeCells();
      if (free.empty()) break;  // retry next step
      respawn_queue_.pop_front();
      const Cell cell = free[rng_.UniformIndex(static_cast<int>(free.size()))];
      ResourceAt(cell) = static_cast<int8_t>(rng_.UniformIndex(kNumResourceKinds));
    }
  }

  void ApplyAction(int idx, Action action, StepOutcome& outcome) {
    PlayerState& player = players_[idx];
    switch (action) {
      case Action::kTurnLeft:
        player.orientation = TurnedLeft(player.orientation);
        break;
      case Action::kTurnRight:
        player.orientation = TurnedRight(player.orientation);
        break;
      case Action::kForward:
      case Action::kBackward:
      case Action::kStrafeLeft:
      case Action::kStrafeRight:
        Move(idx, action, outcome);
        break;
      case Action::kTag:
        Tag(idx, outcome);
        break;
      case Action::kNoOp:
        break;
    }
  }

  void Move(int idx, Action action, StepOutcome& outcome) {
    PlayerState& player = players_[idx];
    const Cell fwd = ForwardOf(player.orientation);
    const Cell right = RightOf(player.orientation);
    Cell delta{0, 0};
    switch (action) {
      case Action::kForward: delta = fwd; break;
      case Action::kBackward: delta = Cell{-fwd.row, -fwd.col}; break;
      case Action::kStrafeLeft: delta = Cell{-right.row, -right.col}; break;
      case Action::kStrafeRight: delta = right; break;
      default: return;
    }
    const Cell target{player.position.row + delta.row, player.position.col + delta.col};
    if (!InBounds(target) || PlayerAt(target, idx) >= 0) return;  // blocked
    player.position = target;
    const int8_t resource = ResourceAt(target);
    if (resource != kNoResource) {
      const auto kind = static_cast<ResourceKind>(resource);
      player.inventory[kind] += 1;
      ResourceAt(target) = kNoResource;
      outcome.events.push_back(PickupEvent{idx, kind, target});
      if (config_.respawn_delay.has_value()) {
        respawn_queue_.push_back(step_count_ + *config_.respawn_delay);
      }
    }
  }

  void Tag(int tagger, StepOutcome& outcome) {
    std::optional<int> target = ResolveTag(tagger);
    if (!target.has_value()) return;
    const int tagged = *target;
    const double reward = ComputePayoff(players_[tagger].inventory, players_[tagged].inventory);
    outcome.rewards[tagger] += reward;
    outcome.rewards[tagged] -= reward;
    outcome.events.push_back(ConfrontationEvent{tagger, tagged, reward});
    if (config_.reset_inventory_on_tag) {
      players_[tagger].inventory = Inventory::Initial();
      players_[tagged].inventory = Inventory::Initial();
    }
    if (config_.freeze_duration.has_value()) {
      // Tagged player is teleported to a random free cell and sits out the
      // next freeze_duration steps.
      players_[tagged].frozen_until = step_count_ + 1 + *config_.freeze_duration;
      std::vector<Cell> free = FreeCells();
      if (!free.empty()) {
        players_[tagged].position = free[rng_.UniformIndex(static_cast<int>(free.size()))];
      }
    }
    if (config_.terminate_on_tag) terminated_ = true;
  }

  GridConfig config_;
  Rng rng_;
  std::vector<int8_t> grid_;  // kNoResource or ResourceKind index per cell
  std::vector<PlayerState> players_;
  std::deque<int> respawn_queue_;  // step indices at which a resource re-enters
  int step_count_ = 0;
  bool terminated_ = false;
};

}  // namespace opre

#endif  // OPRE_GAME_STATE_HPP_

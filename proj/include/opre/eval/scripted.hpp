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

#ifndef OPRE_EVAL_SCRIPTED_HPP_
#define OPRE_EVAL_SCRIPTED_HPP_

#include <cstdlib>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "opre/eval/policy.hpp"
#include "opre/game/state.hpp"
#include "opre/game/types.hpp"

namespace opre {

// A pure-strategy specialist: collect only its own resource kind, and once it
// holds collect_target of them, hunt the nearest opponent and tag. It plans on
// a memory map built from its own observation window, so it knows exactly what
// a learning agent could know; it moves only into cells its window currently
// shows, which is what guarantees it never steps onto another resource kind.
class ScriptedBot : public Policy {
 public:
  explicit ScriptedBot(ResourceKind kind, int collect_target = 5)
      : kind_(kind), collect_target_(collect_target) {}

  std::string Id() const override {
    return std::string("scripted_") + ResourceName(kind_);
  }
  ResourceKind kind() const { return kind_; }

  void BeginEpisode(const GridConfig& config) override {
    rows_ = config.rows;
    cols_ = config.cols;
    memory_.assign(static_cast<size_t>(rows_) * cols_, kUnknown);
    opponent_.reset();
    opponent_age_ = 0;
    sweep_target_.reset();
    stuck_steps_ = 0;
    hunt_steps_ = 0;
  }

  PolicyStep Act(const SelfView& view, Rng& rng) override {
    UpdateMemory(view);
    PolicyStep step;
    step.action = ChooseAction(view, rng);
    return step;
  }

 private:
  static constexpr int8_t kUnknown = -2;
  static constexpr int8_t kEmpty = -1;
  static constexpr int kOpponentMemorySteps = 12;
  static constexpr int kStuckLimit = 60;
  static constexpr int kHuntPatience = 100;

  bool InBounds(const Cell& c) const {
    return c.row >= 0 && c.row < rows_ && c.col >= 0 && c.col < cols_;
  }
  int8_t& MemoryAt(const Cell& c) { return memory_[static_cast<size_t>(c.row) * cols_ + c.col]; }
  int8_t MemoryAt(const Cell& c) const {
    return memory_[static_cast<size_t>(c.row) * cols_ + c.col];
  }

  static Cell WindowCell(const SelfView& view, int forward, int lateral) {
    const Cell fwd = ForwardOf(view.orientation);
    const Cell right = RightOf(view.orientation);
    return Cell{view.position.row + forward * fwd.row + lateral * right.row,
                view.position.col + forward * fwd.col + lateral * right.col};
  }

  void UpdateMemory(const SelfView& view) {
    if (opponent_.has_value() && ++opponent_age_ > kOpponentMemorySteps) opponent_.reset();
    for (int f = 0; f < kWindowForward; ++f) {
      for (int l = -1; l <= kWindowLateral - 2; ++l) {
        const CellCode code = view.obs.At(f, l);
        if (code == CellCode::kOutOfBounds) continue;
        const Cell cell = WindowCell(view, f, l);
        switch (code) {
          case CellCode::kEmpty:
            MemoryAt(cell) = kEmpty;
            break;
          case CellCode::kOtherPlayer:
            // The ground under a player is always empty; standing on a
            // resource would have collected it.
            MemoryAt(cell) = kEmpty;
            if (!opponent_.has_value() || Closer(cell, *opponent_, view.position)) {
              opponent_ = cell;
              opponent_age_ = 0;
            }
            break;
          case CellCode::kRock:
          case CellCode::kPaper:
          case CellCode::kScissors:
            MemoryAt(cell) =
                static_cast<int8_t>(static_cast<int>(code) - static_cast<int>(CellCode::kRock));
            break;
          default:
            break;
        }
      }
    }
  }

  static bool Closer(const Cell& a, const Cell& b, const Cell& from) {
    const int da = std::abs(a.row - from.row) + std::abs(a.col - from.col);
    const int db = std::abs(b.row - from.row) + std::abs(b.col - from.col);
    return da < db;
  }

  // A cell the bot is willing to walk through: known empty, unexplored, or
  // holding its own resource kind. Planning may route through unexplored
  // cells because every actual move is into a currently visible cell.
  bool Passable(const Cell& c, bool relaxed) const {
    if (!InBounds(c)) return false;
    if (relaxed) return true;
    const int8_t m = MemoryAt(c);
    return m == kUnknown || m == kEmpty || m == static_cast<int8_t>(kind_);
  }

  // First step of a shortest path from `from` to any goal cell, over passable
  // cells. Goals themselves need not be passable (an opponent's cell).
  std::optional<Cell> BfsStep(const Cell& from, const std::vector<Cell>& goals,
                              bool relaxed = false) const {
    if (goals.empty()) return std::nullopt;
    std::vector<int8_t> goal_mask(static_cast<size_t>(rows_) * cols_, 0);
    for (const Cell& g : goals) {
      if (InBounds(g)) goal_mask[static_cast<size_t>(g.row) * cols_ + g.col] = 1;
    }
    std::vector<Cell> parent(static_cast<size_t>(rows_) * cols_, Cell{-1, -1});
    auto parent_at = [&](const Cell& c) -> Cell& {
      return parent[static_cast<size_t>(c.row) * cols_ + c.col];
    };
    std::deque<Cell> frontier{from};
    parent_at(from) = from;
    while (!frontier.empty()) {
      const Cell cur = frontier.front();
      frontier.pop_front();
      if (goal_mask[static_cast<size_t>(cur.row) * cols_ + cur.col] != 0 && !(cur == from)) {
        Cell step = cur;
        while (!(parent_at(step) == from)) step = parent_at(step);
        return step;
      }
      for (const Cell& d : kDirection) {
        const Cell next{cur.row + d.row, cur.col + d.col};
        if (!InBounds(next) || parent_at(next).row >= 0) continue;
        const bool is_goal = goal_mask[static_cast<size_t>(next.row) * cols_ + next.col] != 0;
        if (!is_goal && !Passable(next, relaxed)) continue;
        parent_at(next) = cur;
        frontier.push_back(next);
      }
    }
    return std::nullopt;
  }

  // Turns a desired neighbor cell into an action. Moves only go into cells the
  // current window shows; a cell behind the bot gets a turn instead.
  Action MoveToward(const SelfView& view, const Cell& next, bool relaxed = false) const {
    const Cell fwd = ForwardOf(view.orientation);
    const Cell right = RightOf(view.orientation);
    const Cell delta{next.row - view.position.row, next.col - view.position.col};
    auto blocked = [&](int f, int l) {
      const CellCode code = view.obs.At(f, l);
      if (code == CellCode::kOtherPlayer || code == CellCode::kOutOfBounds) return true;
      if (relaxed) return false;
      return code != CellCode::kEmpty &&
             code != static_cast<CellCode>(static_cast<int>(CellCode::kRock) +
                                           static_cast<int>(kind_));
    };
    if (delta == fwd) return blocked(1, 0) ? Action::kTurnRight : Action::kForward;
    if (delta == right) return blocked(0, 1) ? Action::kTurnRight : Action::kStrafeRight;
    if (delta == Cell{-right.row, -right.col}) {
      return blocked(0, -1) ? Action::kTurnLeft : Action::kStrafeLeft;
    }
    // Behind us and not visible: turn to face it.
    return Action::kTurnRight;
  }

  bool OpponentInTagArea(const SelfView& view) const {
    for (int f = 1; f < kWindowForward; ++f) {
      for (int l = -1; l <= 1; ++l) {
        if (view.obs.At(f, l) == CellCode::kOtherPlayer) return true;
      }
    }
    return false;
  }

  Action ChooseAction(const SelfView& view, Rng& rng) {
    const int collected = view.obs.inventory[kind_] - 1;  // inventories start at (1,1,1)

    if (collected < collect_target_) {
      std::vector<Cell> goals;
      std::vector<Cell> unexplored;
      for (int r = 0; r < rows_; ++r) {
        for (int c = 0; c < cols_; ++c) {
          const int8_t m = MemoryAt(Cell{r, c});
          if (m == static_cast<int8_t>(kind_)) goals.push_back(Cell{r, c});
          if (m == kUnknown) unexplored.push_back(Cell{r, c});
        }
      }
      if (auto step = BfsStep(view.position, goals)) {
        stuck_steps_ = 0;
        return MoveToward(view, *step);
      }
      if (auto step = BfsStep(view.position, unexplored)) {
        stuck_steps_ = 0;
        return MoveToward(view, *step);
      }
      // Neither a known target nor the frontier is reachable without walking
      // over foreign resources. Sweep for a while in case the opponent clears
      // a path, then give up on collecting and hunt instead.
      if ((!goals.empty() || !unexplored.empty()) && ++stuck_steps_ <= kStuckLimit) {
        return Explore(view, rng);
      }
    }

    // Hunt: tag when the opponent is in the 3x3 area ahead, else head for the
    // last place one was seen, else sweep. A long fruitless hunt switches to
    // routes through foreign resources so a walled-in bot still closes in.
    const bool desperate = ++hunt_steps_ > kHuntPatience;
    if (OpponentInTagArea(view)) return Action::kTag;
    if (opponent_.has_value()) {
      if (auto step = BfsStep(view.position, {*opponent_})) return MoveToward(view, *step);
      if (desperate) {
        if (auto step = BfsStep(view.position, {*opponent_}, true)) {
          return MoveToward(view, *step, true);
        }
      }
    }
    return Explore(view, rng, desperate);
  }

  // Head for the nearest unexplored cell; failing that, wander to a random
  // target so the window keeps sweeping the grid.
  Action Explore(const SelfView& view, Rng& rng, bool relaxed = false) {
    std::vector<Cell> goals;
    for (int r = 0; r < rows_; ++r) {
      for (int c = 0; c < cols_; ++c) {
        if (MemoryAt(Cell{r, c}) == kUnknown) goals.push_back(Cell{r, c});
      }
    }
    if (auto step = BfsStep(view.position, goals)) return MoveToward(view, *step);

    for (int attempt = 0; attempt < 8; ++attempt) {
      if (!sweep_target_.has_value() || *sweep_target_ == view.position) {
        sweep_target_ = Cell{rng.UniformIndex(rows_), rng.UniformIndex(cols_)};
      }
      if (auto step = BfsStep(view.position, {*sweep_target_}, relaxed)) {
        return MoveToward(view, *step, relaxed);
      }
      sweep_target_.reset();
    }
    return rng.UniformDouble() < 0.5 ? Action::kTurnLeft : Action::kTurnRight;
  }

  ResourceKind kind_;
  int collect_target_;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int8_t> memory_;
  std::optional<Cell> opponent_;  // last seen position
  int opponent_age_ = 0;
  std::optional<Cell> sweep_target_;
  int stuck_steps_ = 0;
  int hunt_steps_ = 0;
};

}  // namespace opre

#endif  // OPRE_EVAL_SCRIPTED_HPP_

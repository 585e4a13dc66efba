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

#ifndef OPRE_GAME_TYPES_HPP_
#define OPRE_GAME_TYPES_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace opre {

enum class ResourceKind : int { kRock = 0, kPaper = 1, kScissors = 2 };
inline constexpr int kNumResourceKinds = 3;

// The kind that beats `kind`: paper covers rock, scissors cut paper, rock
// blunts scissors.
inline constexpr ResourceKind Counter(ResourceKind kind) {
  switch (kind) {
    case ResourceKind::kRock: return ResourceKind::kPaper;
    case ResourceKind::kPaper: return ResourceKind::kScissors;
    case ResourceKind::kScissors: return ResourceKind::kRock;
  }
  return ResourceKind::kRock;
}

inline const char* ResourceName(ResourceKind kind) {
  switch (kind) {
    case ResourceKind::kRock: return "rock";
    case ResourceKind::kPaper: return "paper";
    case ResourceKind::kScissors: return "scissors";
  }
  return "?";
}

enum class Action : int {
  kForward = 0,
  kBackward = 1,
  kStrafeLeft = 2,
  kStrafeRight = 3,
  kTurnLeft = 4,
  kTurnRight = 5,
  kTag = 6,
  kNoOp = 7,
};
inline constexpr int kNumActions = 8;

enum class Orientation : int { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct Inventory {
  std::array<int, kNumResourceKinds> counts = {0, 0, 0};

  static Inventory Initial() { return Inventory{{1, 1, 1}}; }
  int& operator[](ResourceKind k) { return counts[static_cast<int>(k)]; }
  int operator[](ResourceKind k) const { return counts[static_cast<int>(k)]; }
  int L1Norm() const { return counts[0] + counts[1] + counts[2]; }
  friend bool operator==(const Inventory&, const Inventory&) = default;
};

struct PlayerState {
  Cell position;
  Orientation orientation = Orientation::kNorth;
  Inventory inventory = Inventory::Initial();
  // Step index at which the player may act again; nullopt when not frozen.
  std::optional<int> frozen_until;
  friend bool operator==(const PlayerState&, const PlayerState&) = default;
};

struct GridConfig {
  std::string name;
  int rows = 0;
  int cols = 0;
  int num_players = 2;
  std::vector<std::pair<Cell, ResourceKind>> deterministic_resource_cells;
  std::vector<Cell> random_resource_cells;
  int episode_limit = 500;
  std::optional<int> respawn_delay;
  std::optional<int> freeze_duration;
  bool reset_inventory_on_tag = false;
  bool terminate_on_tag = true;
};

// Content codes for one window cell of an egocentric observation.
enum class CellCode : uint8_t {
  kEmpty = 0,
  kOutOfBounds = 1,
  kRock = 2,
  kPaper = 3,
  kScissors = 4,
  kOtherPlayer = 5,
};
inline constexpr int kObsChannels = 6;
inline constexpr int kWindowForward = 4;   // rows ahead, including own row
inline constexpr int kWindowLateral = 4;   // columns, starting one left of self
inline constexpr int kWindowCells = kWindowForward * kWindowLateral;

// Egocentric view: 4x4 window rotated so the facing direction is "up". The
// window covers forward offsets 0..3 and lateral offsets -1..2; the agent sits
// at (forward=0, lateral=0). Other players' inventories never appear here.
struct Observation {
  std::array<CellCode, kWindowCells> window{};
  Inventory inventory;
  Orientation orientation = Orientation::kNorth;

  static constexpr int Index(int forward, int lateral) {
    return forward * kWindowLateral + (lateral + 1);
  }
  CellCode At(int forward, int lateral) const { return window[Index(forward, lateral)]; }
  friend bool operator==(const Observation&, const Observation&) = default;
};

struct ConfrontationEvent {
  int tagger = 0;
  int tagged = 0;
  double reward = 0.0;  // accrues to the tagger; the tagged gets exactly -reward
};

struct PickupEvent {
  int player = 0;
  ResourceKind kind = ResourceKind::kRock;
  Cell position;
};

using Event = std::variant<ConfrontationEvent, PickupEvent>;

struct StepOutcome {
  std::vector<double> rewards;
  std::vector<Observation> observations;
  std::vector<Event> events;
  bool terminated = false;
};

}  // namespace opre

#endif  // OPRE_GAME_TYPES_HPP_

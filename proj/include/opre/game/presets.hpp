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

#ifndef OPRE_GAME_PRESETS_HPP_
#define OPRE_GAME_PRESETS_HPP_

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "opre/game/types.hpp"
#include "opre/util/hash.hpp"

namespace opre {

inline constexpr int kPresetFormatVersion = 1;

inline nlohmann::json GridConfigToJson(const GridConfig& config) {
  nlohmann::json j;
  j["format_version"] = kPresetFormatVersion;
  j["name"] = config.name;
  j["rows"] = config.rows;
  j["cols"] = config.cols;
  j["num_players"] = config.num_players;
  auto det = nlohmann::json::array();
  for (const auto& [cell, kind] : config.deterministic_resource_cells) {
    det.push_back({cell.row, cell.col, static_cast<int>(kind)});
  }
  j["deterministic_resource_cells"] = det;
  auto rnd = nlohmann::json::array();
  for (const Cell& cell : config.random_resource_cells) rnd.push_back({cell.row, cell.col});
  j["random_resource_cells"] = rnd;
  j["episode_limit"] = config.episode_limit;
  if (config.respawn_delay) j["respawn_delay"] = *config.respawn_delay;
  if (config.freeze_duration) j["freeze_duration"] = *config.freeze_duration;
  j["reset_inventory_on_tag"] = config.reset_inventory_on_tag;
  j["terminate_on_tag"] = config.terminate_on_tag;
  return j;
}

inline GridConfig GridConfigFromJson(const nlohmann::json& j) {
  if (j.value("format_version", 0) != kPresetFormatVersion) {
    throw std::invalid_argument("preset: unsupported format_version");
  }
  GridConfig config;
  config.name = j.value("name", std::string());
  config.rows = j.at("rows").get<int>();
  config.cols = j.at("cols").get<int>();
  config.num_players = j.at("num_players").get<int>();
  for (const auto& entry : j.at("deterministic_resource_cells")) {
    config.deterministic_resource_cells.push_back(
        {Cell{entry.at(0).get<int>(), entry.at(1).get<int>()},
         static_cast<ResourceKind>(entry.at(2).get<int>())});
  }
  for (const auto& entry : j.at("random_resource_cells")) {
    config.random_resource_cells.push_back(Cell{entry.at(0).get<int>(), entry.at(1).get<int>()});
  }
  config.episode_limit = j.at("episode_limit").get<int>();
  if (j.contains("respawn_delay")) config.respawn_delay = j.at("respawn_delay").get<int>();
  if (j.contains("freeze_duration")) config.freeze_duration = j.at("freeze_duration").get<int>();
  config.reset_inventory_on_tag = j.value("reset_inventory_on_tag", false);
  config.terminate_on_tag = j.value("terminate_on_tag", true);
  return config;
}

// Hash over the canonical serialization; embedded in replays, checkpoints and
// metrics so artifacts can be matched to the exact environment build.
inline std::string GridConfigHash(const GridConfig& config) {
  return HexHash(GridConfigToJson(config).dump());
}

inline void SavePreset(const GridConfig& config, const std::string& path) {
  nlohmann::json j = GridConfigToJson(config);
  j["hash"] = GridConfigHash(config);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("SavePreset: cannot open " + path);
  out << j.dump(2) << "\n";
}

inline GridConfig LoadPreset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("LoadPreset: cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  GridConfig config = GridConfigFromJson(j);
  if (j.contains("hash") && j.at("hash").get<std::string>() != GridConfigHash(config)) {
    throw std::runtime_error("LoadPreset: hash mismatch in " + path);
  }
  return config;
}

// Running With Scissors: 13x21 grid, 2 players, 36 resource cells of which 18
// are deterministic (three 2x3 same-kind patches), single confrontation ends
// the episode, 500-step timeout.
inline GridConfig RwsPreset() {
  GridConfig config;
  config.name = "rws";
  config.rows = 13;
  config.cols = 21;
  config.num_players = 2;
  config.episode_limit = 500;
  config.terminate_on_tag = true;
  auto patch = [&](int row0, int col0, ResourceKind kind) {
    for (int r = row0; r < row0 + 2; ++r) {
      for (int c = col0; c < col0 + 3; ++c) {
        config.deterministic_resource_cells.push_back({Cell{r, c}, kind});
      }
    }
  };
  patch(2, 2, ResourceKind::kRock);       // top-left
  patch(5, 9, ResourceKind::kPaper);      // center
  patch(9, 16, ResourceKind::kScissors);  // bottom-right (mirror of top-left)
  config.random_resource_cells = {
      {0, 5},  {0, 15}, {2, 7},   {2, 13}, {4, 1},  {4, 10}, {4, 19},  {6, 0},   {6, 4},
      {6, 16}, {6, 20}, {8, 1},   {8, 10}, {8, 19}, {10, 7}, {10, 13}, {12, 5},  {12, 15},
  };
  return config;
}

// RPS Arena: 13x42 grid, 5 players, random resources that respawn, inventories
// reset on confrontation, loser teleported and frozen for 50 steps.
inline GridConfig RpsArenaPreset() {
  GridConfig config;
  config.name = "rps_arena";
  config.rows = 13;
  config.cols = 42;
  config.num_players = 5;
  config.episode_limit = 1000;
  config.terminate_on_tag = false;
  config.reset_inventory_on_tag = true;
  config.freeze_duration = 50;
  config.respawn_delay = 100;
  for (int r = 1; r <= 11; r += 2) {
    for (int c = 2; c <= 40; c += 4) {
      config.random_resource_cells.push_back(Cell{r, c});
    }
  }
  return config;
}

// Small RWS variant for exploitation experiments: paper-rich so a counter
// strategy against a rock specialist has headroom. Rocks fill the two left
// columns, papers the four right ones, and the free middle column is where
// both players spawn.
inline GridConfig RwsExploit7Preset() {
  GridConfig config;
  config.name = "rws_exploit7";
  config.rows = 7;
  config.cols = 7;
  config.num_players = 2;
  config.episode_limit = 200;
  config.terminate_on_tag = true;
  auto put = [&](int r, int c, ResourceKind kind) {
    config.deterministic_resource_cells.push_back({Cell{r, c}, kind});
  };
  // 14 rocks, 26 papers, 2 scissors in the right corners.
  for (int r = 0; r <= 6; ++r) {
    put(r, 0, ResourceKind::kRock);
    put(r, 1, ResourceKind::kRock);
  }
  for (int r = 0; r <= 6; ++r) {
    for (int c = 3; c <= 6; ++c) {
      if ((r == 0 || r == 6) && c == 6) continue;
      put(r, c, ResourceKind::kPaper);
    }
  }
  put(0, 6, ResourceKind::kScissors);
  put(6, 6, ResourceKind::kScissors);
  return config;
}

// Small balanced RWS variant for self-play and generalization experiments.
inline GridConfig RwsSelfplay7Preset() {
  GridConfig config;
  config.name = "rws_selfplay7";
  config.rows = 7;
  config.cols = 7;
  config.num_players = 2;
  config.episode_limit = 200;
  config.terminate_on_tag = true;
  auto put = [&](int r, int c, ResourceKind kind) {
    config.deterministic_resource_cells.push_back({Cell{r, c}, kind});
  };
  // 8 clusters of three adjacent cells, one resource of each kind per
  // cluster with a rotated within-cluster order. Every kind is equally
  // accessible from anywhere, so which kind a player picks up is a choice
  // rather than an accident of spawn geometry. Rows 1, 3, 5 and column 3
  // stay free for movement and spawning.
  static constexpr ResourceKind kOrders[3][3] = {
      {ResourceKind::kRock, ResourceKind::kPaper, ResourceKind::kScissors},
      {ResourceKind::kPaper, ResourceKind::kScissors, ResourceKind::kRock},
      {ResourceKind::kScissors, ResourceKind::kRock, ResourceKind::kPaper},
  };
  int triple = 0;
  for (int r = 0; r <= 6; r += 2) {
    for (int c0 : {0, 4}) {
      for (int i = 0; i < 3; ++i) put(r, c0 + i, kOrders[triple % 3][i]);
      ++triple;
    }
  }
  return config;
}

inline GridConfig BuiltinPreset(const std::string& name) {
  if (name == "rws") return RwsPreset();
  if (name == "rps_arena") return RpsArenaPreset();
  if (name == "rws_exploit7") return RwsExploit7Preset();
  if (name == "rws_selfplay7") return RwsSelfplay7Preset();
  throw std::invalid_argument("unknown preset: " + name);
}

// Resolves either a builtin preset name or a path to a preset file.
inline GridConfig ResolvePreset(const std::string& name_or_path) {
  for (const char* builtin : {"rws", "rps_arena", "rws_exploit7", "rws_selfplay7"}) {
    if (name_or_path == builtin) return BuiltinPreset(name_or_path);
  }
  return LoadPreset(name_or_path);
}

}  // namespace opre

#endif  // OPRE_GAME_PRESETS_HPP_

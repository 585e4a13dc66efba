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

#ifndef OPRE_GAME_REPLAY_HPP_
#define OPRE_GAME_REPLAY_HPP_

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "opre/game/presets.hpp"
#include "opre/game/state.hpp"
#include "opre/game/types.hpp"

namespace opre {

// Append-only episode record. First line is the header, then one line per
// step. Rewriting the same episode produces byte-identical output.
struct ReplayHeader {
  GridConfig config;
  uint64_t seed = 0;
  std::vector<std::string> policy_ids;
};

struct ReplayStep {
  std::vector<Action> actions;
  std::vector<Event> events;
  // Behaving policy's option weights, when the acting agent exposes them.
  std::vector<std::vector<double>> option_weights;
};

struct Replay {
  ReplayHeader header;
  std::vector<ReplayStep> steps;
};

inline std::string ReplayHeaderLine(const ReplayHeader& header) {
  nlohmann::json j;
  j["config_hash"] = GridConfigHash(header.config);
  j["preset"] = GridConfigToJson(header.config);
  j["seed"] = header.seed;
  j["policy_ids"] = header.policy_ids;
  return j.dump();
}

inline std::string ReplayStepLine(const ReplayStep& step) {
  nlohmann::json j;
  auto actions = nlohmann::json::array();
  for (Action a : step.actions) actions.push_back(static_cast<int>(a));
  j["a"] = actions;
  auto events = nlohmann::json::array();
  for (const Event& event : step.events) {
    if (const auto* c = std::get_if<ConfrontationEvent>(&event)) {
      events.push_back({"c", c->tagger, c->tagged, c->reward});
    } else {
      const auto& p = std::get<PickupEvent>(event);
      events.push_back({"p", p.player, static_cast<int>(p.kind), p.position.row, p.position.col});
    }
  }
  j["e"] = events;
  if (!step.option_weights.empty()) j["z"] = step.option_weights;
  return j.dump();
}

class ReplayWriter {
 public:
  ReplayWriter(const std::string& path, const ReplayHeader& header) : out_(path) {
    if (!out_) throw std::runtime_error("ReplayWriter: cannot open " + path);
    out_ << ReplayHeaderLine(header) << "\n";
  }

  void Append(const ReplayStep& step) { out_ << ReplayStepLine(step) << "\n"; }

 private:
  std::ofstream out_;
};

inline Replay LoadReplay(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("LoadReplay: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("LoadReplay: empty file " + path);
  nlohmann::json header = nlohmann::json::parse(line);
  Replay replay;
  replay.header.config = GridConfigFromJson(header.at("preset"));
  if (header.at("config_hash").get<std::string>() != GridConfigHash(replay.header.config)) {
    throw std::runtime_error("LoadReplay: config hash mismatch");
  }
  replay.header.seed = header.at("seed").get<uint64_t>();
  replay.header.policy_ids = header.at("policy_ids").get<std::vector<std::string>>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    ReplayStep step;
    for (const auto& a : j.at("a")) step.actions.push_back(static_cast<Action>(a.get<int>()));
    for (const auto& e : j.at("e")) {
      const std::string tag = e.at(0).get<std::string>();
      if (tag == "c") {
        step.events.push_back(
            ConfrontationEvent{e.at(1).get<int>(), e.at(2).get<int>(), e.at(3).get<double>()});
      } else if (tag == "p") {
        step.events.push_back(PickupEvent{e.at(1).get<int>(),
                                          static_cast<ResourceKind>(e.at(2).get<int>()),
                                          Cell{e.at(3).get<int>(), e.at(4).get<int>()}});
      } else {
        throw std::runtime_error("LoadReplay: unknown event tag " + tag);
      }
    }
    if (j.contains("z")) step.option_weights = j.at("z").get<std::vector<std::vector<double>>>();
    replay.steps.push_back(std::move(step));
  }
  return replay;
}

// Re-simulates a replay and checks that the recorded events match. Returns
// the final state.
inline GameState VerifyReplay(const Replay& replay) {
  GameState state = GameState::Reset(replay.header.config, replay.header.seed);
  for (size_t t = 0; t < replay.steps.size(); ++t) {
    StepOutcome outcome = state.Step(replay.steps[t].actions);
    const auto& expected = replay.steps[t].events;
    if (outcome.events.size() != expected.size()) {
      throw std::runtime_error("VerifyReplay: event mismatch at step " + std::to_string(t));
    }
  }
  return state;
}

// ASCII rendering of the full grid, one character per cell.
inline std::string RenderAscii(const GameState& state) {
  const GridConfig& config = state.config();
  std::ostringstream out;
  for (int r = 0; r < config.rows; ++r) {
    for (int c = 0; c < config.cols; ++c) {
      char ch = '.';
      if (auto kind = state.ResourceAtCell(Cell{r, c})) {
        ch = "RPS"[static_cast<int>(*kind)];
      }
      for (int i = 0; i < static_cast<int>(state.players().size()); ++i) {
        if (state.players()[i].position == Cell{r, c}) {
          ch = static_cast<char>('0' + i);
          break;
        }
      }
      out << ch;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace opre

#endif  // OPRE_GAME_REPLAY_HPP_

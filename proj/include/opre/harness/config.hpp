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

#ifndef OPRE_HARNESS_CONFIG_HPP_
#define OPRE_HARNESS_CONFIG_HPP_

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "opre/agent/network.hpp"
#include "opre/agent/variant.hpp"
#include "opre/game/presets.hpp"
#include "opre/harness/queue.hpp"
#include "opre/learn/loss.hpp"
#include "opre/learn/optimizer.hpp"
#include "opre/util/hash.hpp"

namespace opre {

enum class TrainMode { kFixedOpponents, kSelfPlayPool, kHoldoutPopulation };

inline const char* TrainModeName(TrainMode mode) {
  switch (mode) {
    case TrainMode::kFixedOpponents: return "fixed_opponents";
    case TrainMode::kSelfPlayPool: return "self_play_pool";
    case TrainMode::kHoldoutPopulation: return "holdout_population";
  }
  return "?";
}

inline TrainMode TrainModeFromName(const std::string& name) {
  if (name == "fixed_opponents") return TrainMode::kFixedOpponents;
  if (name == "self_play_pool") return TrainMode::kSelfPlayPool;
  if (name == "holdout_population") return TrainMode::kHoldoutPopulation;
  throw std::invalid_argument("unknown training mode: " + name);
}

struct TrainConfig {
  GridConfig preset;
  std::string preset_name = "rws";
  AgentVariant variant = AgentVariant::kOpre;
  TrainMode mode = TrainMode::kFixedOpponents;
  uint64_t seed = 1;
  std::string run_id;

  int num_agents = 1;  // pool size in self-play mode
  int batch_size = 16;
  int unroll_length = 100;
  int64_t max_steps = 160000;  // per learner, in environment steps
  int sync_period = 1;         // slices between actor snapshot refreshes
  int queue_capacity = 64;
  QueueOverflow queue_overflow = QueueOverflow::kBlock;
  int threads = 1;
  int64_t checkpoint_every_updates = 0;  // 0: final checkpoint only
  bool write_metrics = true;

  // fixed_opponents mode
  std::vector<ResourceKind> opponents = {ResourceKind::kRock, ResourceKind::kPaper,
                                         ResourceKind::kScissors};
  int opponent_collect_target = 5;

  // holdout_population mode: 3 * holdout_per_kind + holdout_plain agents
  int holdout_per_kind = 4;
  int holdout_plain = 2;

  LossCoefficients coefficients;
  AdamConfig adam;
  OpreConfig network;

  void Finalize() {
    network.num_opponents = preset.num_players - 1;
    if (run_id.empty()) {
      std::ostringstream id;
      id << TrainModeName(mode) << "_" << VariantName(variant) << "_s" << seed;
      run_id = id.str();
    }
  }
};

inline ResourceKind ResourceKindFromName(const std::string& name) {
  if (name == "rock") return ResourceKind::kRock;
  if (name == "paper") return ResourceKind::kPaper;
  if (name == "scissors") return ResourceKind::kScissors;
  throw std::invalid_argument("unknown resource kind: " + name);
}

inline TrainConfig TrainConfigFromJson(const nlohmann::json& j) {
  TrainConfig config;
  try {
    config.preset_name = j.value("preset", config.preset_name);
    config.preset = ResolvePreset(config.preset_name);
    if (j.contains("variant")) config.variant = VariantFromName(j.at("variant").get<std::string>());
    if (j.contains("mode")) config.mode = TrainModeFromName(j.at("mode").get<std::string>());
    config.seed = j.value("seed", config.seed);
    config.run_id = j.value("run_id", config.run_id);
    config.num_agents = j.value("num_agents", config.num_agents);
    config.batch_size = j.value("batch_size", config.batch_size);
    config.unroll_length = j.value("unroll_length", config.unroll_length);
    config.max_steps = j.value("max_steps", config.max_steps);
    config.sync_period = j.value("sync_period", config.sync_period);
    config.queue_capacity = j.value("queue_capacity", config.queue_capacity);
    if (j.contains("queue_overflow")) {
      const std::string name = j.at("queue_overflow").get<std::string>();
      if (name == "block") {
        config.queue_overflow = QueueOverflow::kBlock;
      } else if (name == "drop_oldest") {
        config.queue_overflow = QueueOverflow::kDropOldest;
      } else {
        throw std::invalid_argument("unknown queue_overflow: " + name);
      }
    }
    config.threads = j.value("threads", config.threads);
    config.checkpoint_every_updates =
        j.value("checkpoint_every_updates", config.checkpoint_every_updates);
    config.write_metrics = j.value("write_metrics", config.write_metrics);
    if (j.contains("opponents")) {
      config.opponents.clear();
      for (const auto& name : j.at("opponents")) {
        config.opponents.push_back(ResourceKindFromName(name.get<std::string>()));
      }
    }
    config.opponent_collect_target =
        j.value("opponent_collect_target", config.opponent_collect_target);
    config.holdout_per_kind = j.value("holdout_per_kind", config.holdout_per_kind);
    config.holdout_plain = j.value("holdout_plain", config.holdout_plain);

    if (j.contains("coefficients")) {
      const auto& c = j.at("coefficients");
      auto& k = config.coefficients;
      k.lambda_v = c.value("lambda_v", k.lambda_v);
      k.lambda_kl = c.value("lambda_kl", k.lambda_kl);
      k.lambda_reg = c.value("lambda_reg", k.lambda_reg);
      k.lambda_ent = c.value("lambda_ent", k.lambda_ent);
      k.lambda_aux = c.value("lambda_aux", k.lambda_aux);
      k.gamma = c.value("gamma", k.gamma);
      k.rho_bar = c.value("rho_bar", k.rho_bar);
      k.c_bar = c.value("c_bar", k.c_bar);
    }
    if (j.contains("adam")) {
      const auto& a = j.at("adam");
      config.adam.learning_rate = a.value("learning_rate", config.adam.learning_rate);
      config.adam.beta1 = a.value("beta1", config.adam.beta1);
      config.adam.beta2 = a.value("beta2", config.adam.beta2);
      config.adam.epsilon = a.value("epsilon", config.adam.epsilon);
      config.adam.clip_norm = a.value("clip_norm", config.adam.clip_norm);
    }
    if (j.contains("network")) {
      const auto& n = j.at("network");
      auto& net = config.network;
      net.num_options = n.value("num_options", net.num_options);
      net.conv_channels = n.value("conv_channels", net.conv_channels);
      net.conv_width = n.value("conv_width", net.conv_width);
      net.torso_hidden1 = n.value("torso_hidden1", net.torso_hidden1);
      net.torso_hidden2 = n.value("torso_hidden2", net.torso_hidden2);
      net.lstm_hidden = n.value("lstm_hidden", net.lstm_hidden);
      net.option_hidden = n.value("option_hidden", net.option_hidden);
      net.q_embed = n.value("q_embed", net.q_embed);
      net.q_hidden = n.value("q_hidden", net.q_hidden);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("train config: ") + e.what());
  }

  if (config.batch_size <= 0 || config.unroll_length <= 0 || config.max_steps <= 0 ||
      config.num_agents <= 0 || config.queue_capacity <= 0 || config.threads <= 0 ||
      config.sync_period <= 0) {
    throw std::invalid_argument("train config: sizes must be positive");
  }
  if (config.mode == TrainMode::kFixedOpponents && config.opponents.empty()) {
    throw std::invalid_argument("train config: fixed_opponents mode needs opponents");
  }
  if (config.holdout_per_kind < 0 || config.holdout_plain < 0 ||
      config.holdout_per_kind * kNumResourceKinds + config.holdout_plain < 2) {
    throw std::invalid_argument("train config: hold-out population too small");
  }
  config.Finalize();
  return config;
}

inline TrainConfig LoadTrainConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("train config: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("train config: " + path + ": " + e.what());
  }
  return TrainConfigFromJson(j);
}

inline std::string TrainConfigHash(const TrainConfig& config) {
  std::ostringstream out;
  out << config.preset_name << "|" << GridConfigHash(config.preset) << "|"
      << VariantName(config.variant) << "|" << TrainModeName(config.mode) << "|" << config.seed
      << "|" << config.num_agents << "|" << config.batch_size << "|" << config.unroll_length << "|"
      << config.max_steps << "|" << config.sync_period << "|" << config.queue_capacity << "|"
      << config.threads << "|" << config.opponent_collect_target << "|";
  for (ResourceKind kind : config.opponents) out << ResourceName(kind) << ",";
  const auto& k = config.coefficients;
  out << "|" << k.lambda_v << "," << k.lambda_kl << "," << k.lambda_reg << "," << k.lambda_ent
      << "," << k.lambda_aux << "," << k.gamma << "," << k.rho_bar << "," << k.c_bar;
  out << "|" << config.adam.learning_rate << "," << config.adam.clip_norm;
  const auto& n = config.network;
  out << "|" << n.num_options << "," << n.conv_channels << "," << n.conv_width << ","
      << n.torso_hidden1 << "," << n.torso_hidden2 << "," << n.lstm_hidden << ","
      << n.option_hidden << "," << n.q_embed << "," << n.q_hidden;
  return HexHash(out.str());
}

}  // namespace opre

#endif  // OPRE_HARNESS_CONFIG_HPP_

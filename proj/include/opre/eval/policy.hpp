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

#ifndef OPRE_EVAL_POLICY_HPP_
#define OPRE_EVAL_POLICY_HPP_

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opre/agent/network.hpp"
#include "opre/agent/variant.hpp"
#include "opre/game/types.hpp"
#include "opre/util/rng.hpp"

namespace opre {

// What one seat is allowed to know when choosing an action: its own egocentric
// observation plus its own pose. Other players' observations and inventories
// are never part of this view.
struct SelfView {
  Observation obs;
  Cell position;
  Orientation orientation = Orientation::kNorth;
};

struct PolicyStep {
  Action action = Action::kNoOp;
  double behavior_prob = 1.0;
  std::vector<double> option_weights;  // empty when the policy exposes none
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string Id() const = 0;
  virtual void BeginEpisode(const GridConfig& config) = 0;
  virtual PolicyStep Act(const SelfView& view, Rng& rng) = 0;
};

class RandomPolicy : public Policy {
 public:
  std::string Id() const override { return "random"; }
  void BeginEpisode(const GridConfig&) override {}
  PolicyStep Act(const SelfView&, Rng& rng) override {
    PolicyStep step;
    step.action = static_cast<Action>(rng.UniformIndex(kNumActions));
    step.behavior_prob = 1.0 / kNumActions;
    return step;
  }
};

using ParamSnapshot = std::shared_ptr<const ParameterStore<float>>;

// A network running its behavior policy mu. Keeps the recurrent state across
// steps of one episode; the harness reads that state when it cuts trajectory
// slices. Action selection sees only the SelfView observation.
class NetworkPolicy : public Policy {
 public:
  NetworkPolicy(std::string id, AgentVariant variant, OpreConfig config, ParamSnapshot params)
      : id_(std::move(id)),
        variant_(variant),
        net_(config, variant),
        params_(std::move(params)),
        state_(LstmState<float>::Zero(1, config.lstm_hidden)) {}

  std::string Id() const override { return id_; }
  AgentVariant variant() const { return variant_; }
  const Network<float>& net() const { return net_; }
  const OpreConfig& config() const { return net_.config(); }

  void SetParams(ParamSnapshot params) { params_ = std::move(params); }
  const ParamSnapshot& params() const { return params_; }
  uint64_t param_version() const { return params_->version(); }

  void SetForcedOption(std::optional<int> option) { forced_option_ = option; }

  void BeginEpisode(const GridConfig&) override {
    state_ = LstmState<float>::Zero(1, net_.config().lstm_hidden);
  }

  PolicyStep Act(const SelfView& view, Rng& rng) override {
    ActResult result = net_.Act(*params_, view.obs, state_, rng, forced_option_);
    PolicyStep step;
    step.action = static_cast<Action>(result.action);
    step.behavior_prob = result.mu_action_prob;
    step.option_weights = result.p;
    return step;
  }

  const LstmState<float>& state() const { return state_; }

 private:
  std::string id_;
  AgentVariant variant_;
  Network<float> net_;
  ParamSnapshot params_;
  LstmState<float> state_;
  std::optional<int> forced_option_;
};

}  // namespace opre

#endif  // OPRE_EVAL_POLICY_HPP_

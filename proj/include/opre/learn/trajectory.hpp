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

#ifndef OPRE_LEARN_TRAJECTORY_HPP_
#define OPRE_LEARN_TRAJECTORY_HPP_

#include <cmath>
#include <stdexcept>
#include <vector>

#include "opre/game/types.hpp"

namespace opre {

// One contiguous slice of one episode, as recorded by an actor. Sequences
// shorter than the unroll length arise when the episode ends first.
struct Trajectory {
  std::vector<Observation> observations;
  std::vector<std::vector<Observation>> concealed;  // per step, one per opponent
  std::vector<int> actions;
  std::vector<double> behavior_probs;  // mu(a_t), recorded at acting time
  std::vector<double> rewards;
  std::vector<double> initial_h;  // recurrent state at the slice start
  std::vector<double> initial_c;
  Observation bootstrap_obs;
  std::vector<Observation> bootstrap_concealed;
  bool terminal = false;           // episode ended on the last step
  uint64_t behavior_version = 0;   // parameter version the actor used

  size_t Length() const { return observations.size(); }

  void Validate(int num_opponents, int lstm_hidden, bool needs_concealed) const {
    const size_t steps = observations.size();
    if (steps == 0) throw std::invalid_argument("Trajectory: empty");
    if (actions.size() != steps || behavior_probs.size() != steps || rewards.size() != steps) {
      throw std::invalid_argument("Trajectory: misaligned step arrays");
    }
    if (needs_concealed) {
      if (concealed.size() != steps ||
          bootstrap_concealed.size() != static_cast<size_t>(num_opponents)) {
        throw std::invalid_argument("Trajectory: misaligned concealed observations");
      }
      for (const auto& per_step : concealed) {
        if (per_step.size() != static_cast<size_t>(num_opponents)) {
          throw std::invalid_argument("Trajectory: wrong opponent count");
        }
      }
    }
    if (initial_h.size() != static_cast<size_t>(lstm_hidden) ||
        initial_c.size() != static_cast<size_t>(lstm_hidden)) {
      throw std::invalid_argument("Trajectory: recurrent state size mismatch");
    }
    for (size_t t = 0; t < steps; ++t) {
      if (!(behavior_probs[t] > 0.0)) throw std::invalid_argument("Trajectory: behavior prob <= 0");
      if (!std::isfinite(rewards[t])) throw std::invalid_argument("Trajectory: non-finite reward");
      if (actions[t] < 0 || actions[t] >= kNumActions) {
        throw std::invalid_argument("Trajectory: action out of range");
      }
    }
  }
};

struct TrajectoryBatch {
  std::vector<Trajectory> sequences;

  size_t MaxLength() const {
    size_t max_len = 0;
    for (const auto& seq : sequences) max_len = std::max(max_len, seq.Length());
    return max_len;
  }

  size_t TotalSteps() const {
    size_t n = 0;
    for (const auto& seq : sequences) n += seq.Length();
    return n;
  }

  void Validate(int num_opponents, int lstm_hidden, bool needs_concealed) const {
    if (sequences.empty()) throw std::invalid_argument("TrajectoryBatch: empty");
    for (const auto& seq : sequences) seq.Validate(num_opponents, lstm_hidden, needs_concealed);
  }
};

}  // namespace opre

#endif  // OPRE_LEARN_TRAJECTORY_HPP_

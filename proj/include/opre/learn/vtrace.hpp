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

#ifndef OPRE_LEARN_VTRACE_HPP_
#define OPRE_LEARN_VTRACE_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace opre {

struct VTraceOutputs {
  std::vector<double> vs;             // T+1 entries; vs[T] is the bootstrap value
  std::vector<double> pg_advantages;  // T entries
  std::vector<double> rhos;           // truncated importance ratios min(rho_bar, pi/mu)
  std::vector<double> cs;             // truncated trace cutters min(c_bar, pi/mu)
};

// Off-policy value targets by the standard backward recursion:
//   vs_t = V_t + delta_t + gamma * c_t * (vs_{t+1} - V_{t+1})
//   delta_t = rho_t * (r_t + gamma * V_{t+1} - V_t)
// `values` has T+1 entries (V of each state plus the bootstrap state); the
// caller zeroes the bootstrap value for terminal sequences.
inline VTraceOutputs VTrace(std::span<const double> values, std::span<const double> target_probs,
                            std::span<const double> behavior_probs, std::span<const double> rewards,
                            double gamma, double rho_bar = 1.0, double c_bar = 1.0) {
  const size_t steps = rewards.size();
  if (values.size() != steps + 1 || target_probs.size() != steps ||
      behavior_probs.size() != steps) {
    throw std::invalid_argument("VTrace: misaligned inputs");
  }
  if (gamma <= 0.0 || gamma > 1.0) throw std::invalid_argument("VTrace: gamma out of range");
  if (c_bar <= 0.0 || rho_bar < c_bar) throw std::invalid_argument("VTrace: need rho_bar >= c_bar > 0");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("VTrace: non-finite value");
  }
  for (size_t t = 0; t < steps; ++t) {
    if (!std::isfinite(rewards[t])) throw std::invalid_argument("VTrace: non-finite reward");
    if (!(behavior_probs[t] > 0.0)) throw std::invalid_argument("VTrace: behavior prob <= 0");
    if (!std::isfinite(target_probs[t]) || target_probs[t] < 0.0) {
      throw std::invalid_argument("VTrace: bad target prob");
    }
  }

  VTraceOutputs out;
  out.vs.assign(steps + 1, 0.0);
  out.pg_advantages.assign(steps, 0.0);
  out.rhos.assign(steps, 0.0);
  out.cs.assign(steps, 0.0);
  out.vs[steps] = values[steps];

  double next_correction = 0.0;  // vs_{t+1} - V_{t+1}
  for (size_t t = steps; t-- > 0;) {
    const double ratio = target_probs[t] / behavior_probs[t];
    out.rhos[t] = std::min(rho_bar, ratio);
    out.cs[t] = std::min(c_bar, ratio);
    const double delta = out.rhos[t] * (rewards[t] + gamma * values[t + 1] - values[t]);
    const double correction = delta + gamma * out.cs[t] * next_correction;
    out.vs[t] = values[t] + correction;
    next_correction = correction;
  }
  for (size_t t = 0; t < steps; ++t) {
    out.pg_advantages[t] = out.rhos[t] * (rewards[t] + gamma * out.vs[t + 1] - values[t]);
  }
  return out;
}

}  // namespace opre

#endif  // OPRE_LEARN_VTRACE_HPP_

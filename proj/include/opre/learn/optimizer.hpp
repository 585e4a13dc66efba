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

#ifndef OPRE_LEARN_OPTIMIZER_HPP_
#define OPRE_LEARN_OPTIMIZER_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "opre/nn/params.hpp"

namespace opre {

struct AdamConfig {
  double learning_rate = 4e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 40.0;
};

// Adaptive-moment optimizer with global gradient-norm clipping. Moments are
// kept at 64-bit regardless of the parameter precision.
template <typename Real>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  const AdamConfig& config() const { return config_; }
  int64_t step() const { return step_; }
  double last_grad_norm() const { return last_grad_norm_; }
  int64_t skipped_updates() const { return skipped_; }

  // Applies one update in place and bumps the parameter version. Non-finite
  // gradients skip the update entirely and return false.
  bool Apply(ParameterStore<Real>& params, const GradientMap<Real>& grads) {
    double sq_norm = 0.0;
    for (const auto& [name, grad] : grads) {
      if (!params.Has(name)) throw std::invalid_argument("Adam: unknown gradient " + name);
      for (Real v : grad.data) {
        const double g = static_cast<double>(v);
        sq_norm += g * g;
      }
    }
    if (!std::isfinite(sq_norm)) {
      ++skipped_;
      last_grad_norm_ = std::nan("");
      return false;
    }
    last_grad_norm_ = std::sqrt(sq_norm);
    const double scale =
        last_grad_norm_ > config_.clip_norm ? config_.clip_norm / last_grad_norm_ : 1.0;

    ++step_;
    const double bias1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double bias2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    for (const auto& [name, grad] : grads) {
      Tensor<Real>& param = params.Mutable(name);
      std::vector<double>& m = m_[name];
      std::vector<double>& v = v_[name];
      if (m.empty()) m.assign(grad.data.size(), 0.0);
      if (v.empty()) v.assign(grad.data.size(), 0.0);
      for (size_t i = 0; i < grad.data.size(); ++i) {
        const double g = static_cast<double>(grad.data[i]) * scale;
        m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
        v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
        const double update =
            config_.learning_rate * (m[i] / bias1) / (std::sqrt(v[i] / bias2) + config_.epsilon);
        param.data[i] = static_cast<Real>(static_cast<double>(param.data[i]) - update);
      }
    }
    params.IncrementVersion();
    return true;
  }

  const std::map<std::string, std::vector<double>>& first_moments() const { return m_; }
  const std::map<std::string, std::vector<double>>& second_moments() const { return v_; }
  void RestoreState(int64_t step, std::map<std::string, std::vector<double>> m,
                    std::map<std::string, std::vector<double>> v) {
    step_ = step;
    m_ = std::move(m);
    v_ = std::move(v);
  }

 private:
  AdamConfig config_;
  int64_t step_ = 0;
  int64_t skipped_ = 0;
  double last_grad_norm_ = 0.0;
  std::map<std::string, std::vector<double>> m_;
  std::map<std::string, std::vector<double>> v_;
};

}  // namespace opre

#endif  // OPRE_LEARN_OPTIMIZER_HPP_

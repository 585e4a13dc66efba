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

#ifndef OPRE_LEARN_LOSS_HPP_
#define OPRE_LEARN_LOSS_HPP_

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "opre/agent/network.hpp"
#include "opre/agent/variant.hpp"
#include "opre/learn/trajectory.hpp"
#include "opre/learn/vtrace.hpp"
#include "opre/nn/tape.hpp"

namespace opre {

struct LossCoefficients {
  double lambda_v = 0.5;
  double lambda_kl = 1.0;
  double lambda_reg = 0.01;
  double lambda_ent = 0.01;
  double lambda_aux = 0.5;
  double gamma = 0.99;
  double rho_bar = 1.0;
  double c_bar = 1.0;
};

// Component selectors, mainly for gradient-topology checks.
enum LossComponents : unsigned {
  kLossPolicy = 1u << 0,
  kLossValue = 1u << 1,
  kLossKl = 1u << 2,
  kLossEntropyReg = 1u << 3,  // the H^T - H^B pair
  kLossPolicyEntropy = 1u << 4,
  kLossAux = 1u << 5,
  kLossAll = 0x3f,
};

struct LossBreakdown {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double kl_qp = 0.0;
  double reg_Ht = 0.0;
  double reg_Hb = 0.0;
  double reg_Hpi = 0.0;
  double aux_loss = 0.0;
  double total = 0.0;
  LossCoefficients coefficients;
};

// V-trace targets per sequence; computed from the forward pass by default
// but overridable so finite-difference checks can hold them fixed. The
// stopped_* captures hold the values flowing into stop-gradient sites; when a
// caller replays with fixed targets, those sites become constants so a
// finite-difference pass probes exactly the differentiated paths.
struct LossTargets {
  std::vector<std::vector<double>> vs;             // [B][len+1]
  std::vector<std::vector<double>> pg_advantages;  // [B][len]
  std::vector<std::vector<std::vector<double>>> stopped_q;  // [T][B][K]
  std::vector<std::vector<std::vector<double>>> stopped_p;  // [T+1][B][K]
};

template <typename Real>
struct LossResult {
  LossBreakdown breakdown;
  GradientMap<Real> gradients;
  LossTargets targets;
};

struct EntropyRegTerms {
  double ht = 0.0;   // mean within-episode time-marginal entropy, minimized
  double hb = 0.0;   // batch-marginal entropy, maximized
  double hpi = 0.0;  // mean per-step policy entropy, maximized
};

// Numeric oracle-style evaluation of the three regularizer statistics over
// ragged [B][T][K] option distributions and [B][T][A] policies.
inline EntropyRegTerms EntropyReg(const std::vector<std::vector<std::vector<double>>>& q,
                                  const std::vector<std::vector<std::vector<double>>>& pi) {
  auto entropy = [](const std::vector<double>& dist) {
    double h = 0.0;
    for (double v : dist) {
      if (v > 1e-30) h -= v * std::log(v);
    }
    return h;
  };
  EntropyRegTerms out;
  size_t total_steps = 0;
  std::vector<double> batch_marginal;
  for (const auto& seq : q) {
    if (seq.empty()) throw std::invalid_argument("EntropyReg: empty sequence");
    std::vector<double> time_marginal(seq[0].size(), 0.0);
    for (const auto& dist : seq) {
      for (size_t z = 0; z < dist.size(); ++z) time_marginal[z] += dist[z] / seq.size();
    }
    out.ht += entropy(time_marginal) / q.size();
    if (batch_marginal.empty()) batch_marginal.assign(seq[0].size(), 0.0);
    for (const auto& dist : seq) {
      for (size_t z = 0; z < dist.size(); ++z) batch_marginal[z] += dist[z];
      ++total_steps;
    }
  }
  if (total_steps > 0) {
    for (double& v : batch_marginal) v /= static_cast<double>(total_steps);
    out.hb = entropy(batch_marginal);
  }
  size_t pi_steps = 0;
  for (const auto& seq : pi) {
    for (const auto& dist : seq) {
      out.hpi += entropy(dist);
      ++pi_steps;
    }
  }
  if (pi_steps > 0) out.hpi /= static_cast<double>(pi_steps);
  return out;
}

// Composite loss for every agent variant, with the variant's prescribed
// gradient-flow topology. Returns analytic gradients for all parameters.
template <typename Real>
LossResult<Real> ComputeLoss(const Network<Real>& net, const TrajectoryBatch& batch,
                             const ParameterStore<Real>& params, const LossCoefficients& coeffs,
                             unsigned components = kLossAll,
                             const LossTargets* fixed_targets = nullptr) {
  using Var = typename Tape<Real>::Var;
  const OpreConfig& config = net.config();
  const AgentVariant variant = net.variant();
  const bool needs_concealed = UsesConcealedInfo(variant);
  batch.Validate(config.num_opponents, config.lstm_hidden, needs_concealed);

  const int batch_size = static_cast<int>(batch.sequences.size());
  const size_t max_len = batch.MaxLength();
  const double total_steps = static_cast<double>(batch.TotalSteps());

  const bool uses_q = net.HasQNet();
  const bool uses_entropy_reg = uses_q && variant != AgentVariant::kBaselineCcFact;
  const bool uses_kl = uses_q;
  const bool uses_aux = variant == AgentVariant::kBaselineAux;

  Tape<Real> tape(&params);

  // Initial recurrent state.
  Tensor<Real> h0 = Tensor<Real>::Zeros({batch_size, config.lstm_hidden});
  Tensor<Real> c0 = Tensor<Real>::Zeros({batch_size, config.lstm_hidden});
  for (int b = 0; b < batch_size; ++b) {
    const Trajectory& seq = batch.sequences[static_cast<size_t>(b)];
    for (int j = 0; j < config.lstm_hidden; ++j) {
      h0.at(b, j) = static_cast<Real>(seq.initial_h[static_cast<size_t>(j)]);
      c0.at(b, j) = static_cast<Real>(seq.initial_c[static_cast<size_t>(j)]);
    }
  }
  Var h = tape.Constant(std::move(h0));
  Var c_state = tape.Constant(std::move(c0));

  // Unroll through max_len + 1 steps; step Length() of each sequence is its
  // bootstrap observation (repeated afterwards for shorter sequences, with
  // all loss terms masked out there).
  std::vector<typename Network<Real>::TapeOutput> outs;
  outs.reserve(max_len + 1);
  for (size_t t = 0; t <= max_len; ++t) {
    std::vector<Observation> obs_rows(static_cast<size_t>(batch_size));
    std::vector<std::vector<Observation>> con_rows(
        static_cast<size_t>(needs_concealed ? config.num_opponents : 0),
        std::vector<Observation>(static_cast<size_t>(batch_size)));
    for (int b = 0; b < batch_size; ++b) {
      const Trajectory& seq = batch.sequences[static_cast<size_t>(b)];
      const bool in_range = t < seq.Length();
      obs_rows[static_cast<size_t>(b)] = in_range ? seq.observations[t] : seq.bootstrap_obs;
      for (size_t j = 0; j < con_rows.size(); ++j) {
        con_rows[j][static_cast<size_t>(b)] =
            in_range ? seq.concealed[t][j] : seq.bootstrap_concealed[j];
      }
    }
    std::vector<Var> con_vars;
    for (auto& rows : con_rows) {
      con_vars.push_back(tape.Constant(EncodeObservationBatch<Real>(rows)));
    }
    outs.push_back(
        net.Forward(tape, tape.Constant(EncodeObservationBatch<Real>(obs_rows)), con_vars, h, c_state));
    h = tape.LstmOutput(outs.back().hc);
    c_state = tape.LstmCell(outs.back().hc);
  }

  LossTargets targets;
  if (fixed_targets != nullptr) targets = *fixed_targets;

  auto capture_rows = [&](Var x) {
    const Tensor<Real>& v = tape.Value(x);
    std::vector<std::vector<double>> rows(static_cast<size_t>(batch_size),
                                          std::vector<double>(static_cast<size_t>(v.cols())));
    for (int b = 0; b < batch_size; ++b) {
      for (int j = 0; j < v.cols(); ++j) {
        rows[static_cast<size_t>(b)][static_cast<size_t>(j)] = static_cast<double>(v.at(b, j));
      }
    }
    return rows;
  };
  // A stop-gradient site: identical forward value and identical (absent)
  // gradient either way, but replaying with fixed targets pins the site to
  // the captured numbers.
  auto stop_site = [&](Var x, std::vector<std::vector<std::vector<double>>>& store,
                       size_t t) -> Var {
    if (fixed_targets != nullptr) {
      const auto& rows = store.at(t);
      Tensor<Real> frozen =
          Tensor<Real>::Zeros({batch_size, static_cast<int>(rows[0].size())});
      for (int b = 0; b < batch_size; ++b) {
        for (size_t j = 0; j < rows[0].size(); ++j) {
          frozen.at(b, static_cast<int>(j)) =
              static_cast<Real>(rows[static_cast<size_t>(b)][j]);
        }
      }
      return tape.Constant(std::move(frozen));
    }
    if (store.size() <= t) store.resize(t + 1);
    store[t] = capture_rows(x);
    return tape.StopGradient(x);
  };

  // For pure-mixture training the critic trains c only; p learns from the
  // policy gradient alone.
  std::vector<Var> values_v(max_len + 1);
  for (size_t t = 0; t <= max_len; ++t) {
    values_v[t] = variant == AgentVariant::kPureMix
                      ? tape.RowDot(stop_site(outs[t].p, targets.stopped_p, t), outs[t].c)
                      : outs[t].V;
  }
  auto value_var = [&](size_t t) -> Var { return values_v[t]; };

  // V-trace targets from the numeric forward values, treated as constants.
  if (fixed_targets == nullptr) {
    targets.vs.resize(static_cast<size_t>(batch_size));
    targets.pg_advantages.resize(static_cast<size_t>(batch_size));
    for (int b = 0; b < batch_size; ++b) {
      const Trajectory& seq = batch.sequences[static_cast<size_t>(b)];
      const size_t len = seq.Length();
      std::vector<double> values(len + 1), pi_probs(len);
      for (size_t t = 0; t <= len; ++t) {
        values[t] = static_cast<double>(tape.Value(value_var(t)).at(b, 0));
      }
      if (seq.terminal) values[len] = 0.0;
      for (size_t t = 0; t < len; ++t) {
        pi_probs[t] = static_cast<double>(tape.Value(outs[t].pi).at(b, seq.actions[t]));
      }
      VTraceOutputs vt = VTrace(values, pi_probs, seq.behavior_probs, seq.rewards, coeffs.gamma,
                                coeffs.rho_bar, coeffs.c_bar);
      targets.vs[static_cast<size_t>(b)] = std::move(vt.vs);
      targets.pg_advantages[static_cast<size_t>(b)] = std::move(vt.pg_advantages);
    }
  }

  // The policy distribution the policy gradient differentiates through,
  // per variant.
  auto pg_dist = [&](size_t t) -> Var {
    switch (variant) {
      case AgentVariant::kOpre:
      case AgentVariant::kOpreMixPg:
        return net.MixPolicy(tape, outs[t].eta, stop_site(outs[t].q, targets.stopped_q, t));
      case AgentVariant::kOpreQGrad:
        return outs[t].pi;
      case AgentVariant::kPureMix:
        return outs[t].mu;
      default:
        return outs[t].pi;  // monolithic baselines
    }
  };
  // The distribution whose entropy is maximized. Kept on the same
  // stop-gradient footing as the policy gradient, so entropy pressure on q
  // comes only from the H^T/H^B pair.
  auto ent_dist = pg_dist;

  Var policy_sum, value_sum, kl_sum, hpi_sum, aux_sum, qbar_acc, qmarg_acc;
  for (size_t t = 0; t < max_len; ++t) {
    Tensor<Real> adv = Tensor<Real>::Zeros({batch_size, 1});
    Tensor<Real> vs_target = Tensor<Real>::Zeros({batch_size, 1});
    Tensor<Real> mask = Tensor<Real>::Zeros({batch_size, 1});
    Tensor<Real> time_w = Tensor<Real>::Zeros({batch_size, 1});  // mask / len_b
    Tensor<Real> batch_w = Tensor<Real>::Zeros({batch_size, 1});  // mask / N
    std::vector<int> actions(static_cast<size_t>(batch_size), 0);
    bool any_valid = false;
    for (int b = 0; b < batch_size; ++b) {
      const Trajectory& seq = batch.sequences[static_cast<size_t>(b)];
      if (t >= seq.Length()) continue;
      any_valid = true;
      adv.at(b, 0) = static_cast<Real>(targets.pg_advantages[static_cast<size_t>(b)][t]);
      vs_target.at(b, 0) = static_cast<Real>(targets.vs[static_cast<size_t>(b)][t]);
      mask.at(b, 0) = Real(1);
      time_w.at(b, 0) = Real(1) / static_cast<Real>(seq.Length());
      batch_w.at(b, 0) = Real(1) / static_cast<Real>(total_steps);
      actions[static_cast<size_t>(b)] = seq.actions[t];
    }
    if (!any_valid) break;
    Var mask_v = tape.Constant(mask);

    if (components & kLossPolicy) {
      Var logp = tape.LogEps(tape.GatherRows(pg_dist(t), actions));
      Var term = tape.Mul(logp, tape.Constant(adv));
      policy_sum = policy_sum.valid() ? tape.Add(policy_sum, term) : term;
      if (variant == AgentVariant::kOpreMixPg) {
        Var mu_sg = net.MixPolicy(tape, outs[t].eta, stop_site(outs[t].p, targets.stopped_p, t));
        Var term2 = tape.Mul(tape.LogEps(tape.GatherRows(mu_sg, actions)),
                             tape.Constant(std::move(adv)));
        policy_sum = tape.Add(policy_sum, term2);
      }
    }
    if (components & kLossValue) {
      Var diff = tape.Mul(tape.Sub(tape.Constant(std::move(vs_target)), value_var(t)), mask_v);
      Var sq = tape.Square(diff);
      value_sum = value_sum.valid() ? tape.Add(value_sum, sq) : sq;
    }
    if (uses_kl && (components & kLossKl)) {
      Var q = outs[t].q;
      Var kl_rows = tape.RowDot(q, tape.Sub(tape.LogEps(q), tape.LogEps(outs[t].p)));
      Var kl_term = tape.Mul(kl_rows, mask_v);
      kl_sum = kl_sum.valid() ? tape.Add(kl_sum, kl_term) : kl_term;
    }
    if (uses_entropy_reg && (components & kLossEntropyReg)) {
      Var q_time = tape.ScaleRows(outs[t].q, tape.Constant(std::move(time_w)));
      qbar_acc = qbar_acc.valid() ? tape.Add(qbar_acc, q_time) : q_time;
      Var q_batch = tape.ScaleRows(outs[t].q, tape.Constant(std::move(batch_w)));
      qmarg_acc = qmarg_acc.valid() ? tape.Add(qmarg_acc, q_batch) : q_batch;
    }
    if (components & kLossPolicyEntropy) {
      Var dist = ent_dist(t);
      Var h_rows = tape.Mul(tape.RowDot(dist, tape.LogEps(dist)), mask_v);
      hpi_sum = hpi_sum.valid() ? tape.Add(hpi_sum, h_rows) : h_rows;
    }
    if (uses_aux && (components & kLossAux)) {
      Tensor<Real> target =
          Tensor<Real>::Zeros({batch_size, kNumResourceKinds * config.num_opponents});
      for (int b = 0; b < batch_size; ++b) {
        const Trajectory& seq = batch.sequences[static_cast<size_t>(b)];
        if (t >= seq.Length()) continue;
        for (int j = 0; j < config.num_opponents; ++j) {
          const Inventory& inv = seq.concealed[t][static_cast<size_t>(j)].inventory;
          const int norm = inv.L1Norm();
          for (int k = 0; k < kNumResourceKinds; ++k) {
            target.at(b, j * kNumResourceKinds + k) =
                norm > 0 ? static_cast<Real>(inv.counts[static_cast<size_t>(k)]) / norm : Real(0);
          }
        }
      }
      Var diff = tape.ScaleRows(tape.Sub(outs[t].aux, tape.Constant(std::move(target))), mask_v);
      Var sq = tape.Sum(tape.Square(diff));
      aux_sum = aux_sum.valid() ? tape.Add(aux_sum, sq) : sq;
    }
  }

  // Assemble scalar components.
  LossResult<Real> result;
  result.breakdown.coefficients = coeffs;
  result.targets = std::move(targets);
  Var total;
  auto add_term = [&](Var scalar, double weight) {
    Var term = tape.Scale(scalar, static_cast<Real>(weight));
    total = total.valid() ? tape.Add(total, term) : term;
    return term;
  };

  if (policy_sum.valid()) {
    Var policy_loss = tape.Scale(tape.Sum(policy_sum), Real(-1.0 / total_steps));
    result.breakdown.policy_loss = static_cast<double>(tape.Value(policy_loss).data[0]);
    add_term(policy_loss, 1.0);
  }
  if (value_sum.valid()) {
    Var value_loss = tape.Scale(tape.Sum(value_sum), Real(0.5 / total_steps));
    result.breakdown.value_loss = static_cast<double>(tape.Value(value_loss).data[0]);
    add_term(value_loss, coeffs.lambda_v);
  }
  if (kl_sum.valid()) {
    Var kl = tape.Scale(tape.Sum(kl_sum), Real(1.0 / total_steps));
    result.breakdown.kl_qp = static_cast<double>(tape.Value(kl).data[0]);
    add_term(kl, coeffs.lambda_kl);
  }
  if (qbar_acc.valid()) {
    Var ht = tape.Scale(tape.Sum(tape.Mul(qbar_acc, tape.LogEps(qbar_acc))),
                        Real(-1.0 / batch_size));
    Var qmarg = tape.ColSum(qmarg_acc);
    Var hb = tape.Scale(tape.Sum(tape.Mul(qmarg, tape.LogEps(qmarg))), Real(-1));
    result.breakdown.reg_Ht = static_cast<double>(tape.Value(ht).data[0]);
    result.breakdown.reg_Hb = static_cast<double>(tape.Value(hb).data[0]);
    add_term(ht, coeffs.lambda_reg);
    add_term(hb, -coeffs.lambda_reg);
  }
  if (hpi_sum.valid()) {
    Var hpi = tape.Scale(tape.Sum(hpi_sum), Real(-1.0 / total_steps));
    result.breakdown.reg_Hpi = static_cast<double>(tape.Value(hpi).data[0]);
    add_term(hpi, -coeffs.lambda_ent);
  }
  if (aux_sum.valid()) {
    Var aux = tape.Scale(aux_sum, Real(1.0 / (total_steps * kNumResourceKinds *
                                              config.num_opponents)));
    result.breakdown.aux_loss = static_cast<double>(tape.Value(aux).data[0]);
    add_term(aux, coeffs.lambda_aux);
  }
  if (!total.valid()) throw std::invalid_argument("ComputeLoss: no components selected");
  result.breakdown.total = static_cast<double>(tape.Value(total).data[0]);
  result.gradients = tape.Backward(total);
  return result;
}

template <typename Real>
LossResult<Real> OpreLoss(const Network<Real>& net, const TrajectoryBatch& batch,
                          const ParameterStore<Real>& params, const LossCoefficients& coeffs,
                          unsigned components = kLossAll,
                          const LossTargets* fixed_targets = nullptr) {
  if (!IsOpreFamily(net.variant())) throw std::invalid_argument("OpreLoss: not an OPRE variant");
  return ComputeLoss(net, batch, params, coeffs, components, fixed_targets);
}

template <typename Real>
LossResult<Real> BaselineLoss(const Network<Real>& net, const TrajectoryBatch& batch,
                              const ParameterStore<Real>& params, const LossCoefficients& coeffs,
                              unsigned components = kLossAll,
                              const LossTargets* fixed_targets = nullptr) {
  if (IsOpreFamily(net.variant())) throw std::invalid_argument("BaselineLoss: not a baseline");
  return ComputeLoss(net, batch, params, coeffs, components, fixed_targets);
}

}  // namespace opre

#endif  // OPRE_LEARN_LOSS_HPP_

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

#ifndef OPRE_AGENT_NETWORK_HPP_
#define OPRE_AGENT_NETWORK_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "opre/agent/variant.hpp"
#include "opre/game/types.hpp"
#include "opre/nn/params.hpp"
#include "opre/nn/tape.hpp"
#include "opre/util/rng.hpp"

namespace opre {

// One-hot window (position-major, channel-minor, matching the conv1d input
// layout) + L1-normalized inventory + one-hot orientation.
inline constexpr int kObsWindowDim = kWindowCells * kObsChannels;  // 96
inline constexpr int kObsExtraDim = kNumResourceKinds + 4;         // 7
inline constexpr int kObsDim = kObsWindowDim + kObsExtraDim;       // 103

struct OpreConfig {
  int num_options = 16;
  int conv_channels = 6;  // output channels of the window conv
  int conv_width = 3;
  int torso_hidden1 = 64;
  int torso_hidden2 = 64;
  int lstm_hidden = 128;
  int option_hidden = 128;
  int q_embed = 64;
  int q_hidden = 64;
  int num_actions = kNumActions;
  int num_opponents = 1;

  int ConvOutDim() const { return (kWindowCells - conv_width + 1) * conv_channels; }
  int TorsoInDim() const { return ConvOutDim() + kObsExtraDim; }
};

template <typename Real>
void EncodeObservationInto(const Observation& obs, Real* dst) {
  std::fill(dst, dst + kObsDim, Real(0));
  for (int cell = 0; cell < kWindowCells; ++cell) {
    dst[cell * kObsChannels + static_cast<int>(obs.window[cell])] = Real(1);
  }
  const int norm = obs.inventory.L1Norm();
  for (int k = 0; k < kNumResourceKinds; ++k) {
    dst[kObsWindowDim + k] =
        norm > 0 ? static_cast<Real>(obs.inventory.counts[k]) / static_cast<Real>(norm) : Real(0);
  }
  dst[kObsWindowDim + kNumResourceKinds + static_cast<int>(obs.orientation)] = Real(1);
}

template <typename Real>
Tensor<Real> EncodeObservation(const Observation& obs) {
  Tensor<Real> out = Tensor<Real>::Zeros({1, kObsDim});
  EncodeObservationInto(obs, out.data.data());
  return out;
}

template <typename Real>
Tensor<Real> EncodeObservationBatch(const std::vector<Observation>& obs) {
  Tensor<Real> out = Tensor<Real>::Zeros({static_cast<int>(obs.size()), kObsDim});
  for (size_t i = 0; i < obs.size(); ++i) {
    EncodeObservationInto(obs[i], out.data.data() + i * kObsDim);
  }
  return out;
}

template <typename Real>
struct LstmState {
  Tensor<Real> h;
  Tensor<Real> c;

  static LstmState Zero(int batch, int hidden) {
    return {Tensor<Real>::Zeros({batch, hidden}), Tensor<Real>::Zeros({batch, hidden})};
  }
  friend bool operator==(const LstmState&, const LstmState&) = default;
};

// Numeric forward pass result for one input row (actors, probes, tests).
struct NetworkOutput {
  std::vector<double> q;                 // over K; empty without concealed inputs
  std::vector<double> p;                 // over K; empty for monolithic baselines
  std::vector<std::vector<double>> eta;  // K distributions over actions
  std::vector<double> c;                 // K value components
  double V = 0.0;
  std::vector<double> pi;  // target policy; empty when q is unavailable
  std::vector<double> mu;  // behavior policy, what actors sample from
};

struct ActResult {
  int action = 0;
  double mu_action_prob = 0.0;
  std::vector<double> mu;
  std::vector<double> p;  // over options; one-hot under a forced option
};

template <typename Real>
class Network {
 public:
  using Var = typename Tape<Real>::Var;

  Network(OpreConfig config, AgentVariant variant) : config_(config), variant_(variant) {
    if (config_.num_options < 2) throw std::invalid_argument("Network: num_options < 2");
    if (config_.num_opponents < 1) throw std::invalid_argument("Network: num_opponents < 1");
  }

  const OpreConfig& config() const { return config_; }
  AgentVariant variant() const { return variant_; }

  bool HasOptionHeads() const { return IsOpreFamily(variant_); }
  bool HasFactoredValue() const {
    return (IsOpreFamily(variant_) && variant_ != AgentVariant::kPureMix) ||
           variant_ == AgentVariant::kBaselineCcFact;
  }
  bool HasQNet() const { return HasFactoredValue(); }
  bool HasConcealedEmbed() const { return HasQNet() || variant_ == AgentVariant::kBaselineCc; }

  ParameterStore<Real> InitParams(Rng& rng) const {
    ParameterStore<Real> params;
    const int conv_in = config_.conv_width * kObsChannels;
    params.Add("conv/k", FanInUniform<Real>(rng, conv_in, config_.conv_channels));
    params.Add("conv/b", ZeroBias<Real>(config_.conv_channels));
    params.Add("torso1/w", FanInUniform<Real>(rng, config_.TorsoInDim(), config_.torso_hidden1));
    params.Add("torso1/b", ZeroBias<Real>(config_.torso_hidden1));
    params.Add("torso2/w", FanInUniform<Real>(rng, config_.torso_hidden1, config_.torso_hidden2));
    params.Add("torso2/b", ZeroBias<Real>(config_.torso_hidden2));
    const int hidden = config_.lstm_hidden;
    params.Add("lstm/wx", FanInUniformShaped<Real>(rng, {config_.torso_hidden2, 4 * hidden},
                                                   config_.torso_hidden2));
    params.Add("lstm/wh", FanInUniformShaped<Real>(rng, {hidden, 4 * hidden}, hidden));
    Tensor<Real> lstm_bias = ZeroBias<Real>(4 * hidden);
    for (int j = hidden; j < 2 * hidden; ++j) lstm_bias.data[j] = Real(1);  // forget gate
    params.Add("lstm/b", std::move(lstm_bias));

    const int k_opts = config_.num_options;
    if (HasOptionHeads()) {
      for (int z = 0; z < k_opts; ++z) {
        const std::string base = OptName(z);
        params.Add(base + "/w1", FanInUniform<Real>(rng, hidden, config_.option_hidden));
        params.Add(base + "/b1", ZeroBias<Real>(config_.option_hidden));
        params.Add(base + "/w2", FanInUniform<Real>(rng, config_.option_hidden, config_.num_actions));
        params.Add(base + "/b2", ZeroBias<Real>(config_.num_actions));
      }
    } else {
      params.Add("pi/w", FanInUniform<Real>(rng, hidden, config_.num_actions));
      params.Add("pi/b", ZeroBias<Real>(config_.num_actions));
    }
    if (HasOptionHeads() || variant_ == AgentVariant::kBaselineCcFact) {
      params.Add("p/w", FanInUniform<Real>(rng, hidden, k_opts));
      params.Add("p/b", ZeroBias<Real>(k_opts));
      params.Add("c/w", FanInUniform<Real>(rng, hidden, k_opts));
      params.Add("c/b", ZeroBias<Real>(k_opts));
    }
    if (variant_ == AgentVariant::kBaseline || variant_ == AgentVariant::kBaselineAux) {
      params.Add("v/w", FanInUniform<Real>(rng, hidden, 1));
      params.Add("v/b", ZeroBias<Real>(1));
    }
    if (variant_ == AgentVariant::kBaselineCc) {
      params.Add("v/w", FanInUniform<Real>(rng, hidden + config_.q_hidden, 1));
      params.Add("v/b", ZeroBias<Real>(1));
    }
    if (variant_ == AgentVariant::kBaselineAux) {
      params.Add("aux/w",
                 FanInUniform<Real>(rng, hidden, kNumResourceKinds * config_.num_opponents));
      params.Add("aux/b", ZeroBias<Real>(kNumResourceKinds * config_.num_opponents));
    }
    if (HasConcealedEmbed()) {
      params.Add("q/embed_w", FanInUniform<Real>(rng, config_.TorsoInDim(), config_.q_embed));
      params.Add("q/embed_b", ZeroBias<Real>(config_.q_embed));
      params.Add("q/hid_w", FanInUniform<Real>(rng, config_.q_embed, config_.q_hidden));
      params.Add("q/hid_b", ZeroBias<Real>(config_.q_hidden));
    }
    if (HasQNet()) {
      params.Add("q/out_w", FanInUniform<Real>(rng, config_.q_hidden, k_opts));
      params.Add("q/out_b", ZeroBias<Real>(k_opts));
    }
    return params;
  }

  // Learner-side forward for one step of a batch. `obs` is [B, kObsDim];
  // `concealed` holds one [B, kObsDim] tensor per opponent and may be empty
  // (actor-path semantics: no q, no concealed embedding). Mixtures here carry
  // gradients everywhere; losses that need stop-gradient topology rebuild
  // their own mixtures from q/p/eta/c.
  struct TapeOutput {
    Var hc;                // [B, 2*hidden], next recurrent state
    Var p;                 // [B, K]
    std::vector<Var> eta;  // K of [B, A]
    Var c;                 // [B, K]
    Var q;                 // [B, K]
    Var V;                 // [B, 1]
    Var pi;                // [B, A]
    Var mu;                // [B, A]
    Var aux;               // [B, 3*opponents]
  };

  TapeOutput Forward(Tape<Real>& tape, Var obs, const std::vector<Var>& concealed, Var h,
                     Var c_state) const {
    if (!concealed.empty() && static_cast<int>(concealed.size()) != config_.num_opponents) {
      throw std::invalid_argument("Network::Forward: concealed input count mismatch");
    }
    TapeOutput out;
    Var torso = TorsoTape(tape, obs);
    out.hc = tape.LstmStep(torso, h, c_state, tape.Param("lstm/wx"), tape.Param("lstm/wh"),
                           tape.Param("lstm/b"));
    Var hid = tape.LstmOutput(out.hc);

    if (HasConcealedEmbed() && !concealed.empty()) {
      Var pooled;
      for (Var co : concealed) {
        Var embed = tape.Relu(tape.Dense(TorsoConvTape(tape, co), tape.Param("q/embed_w"),
                                         tape.Param("q/embed_b")));
        pooled = pooled.valid() ? tape.Add(pooled, embed) : embed;
      }
      Var qh = tape.Relu(tape.Dense(pooled, tape.Param("q/hid_w"), tape.Param("q/hid_b")));
      if (HasQNet()) {
        out.q = tape.Softmax(tape.Dense(qh, tape.Param("q/out_w"), tape.Param("q/out_b")));
      }
      if (variant_ == AgentVariant::kBaselineCc) {
        out.V = tape.Dense(tape.ConcatCols({hid, qh}), tape.Param("v/w"), tape.Param("v/b"));
      }
    }

    if (HasOptionHeads()) {
      out.eta.reserve(config_.num_options);
      for (int z = 0; z < config_.num_options; ++z) {
        const std::string base = OptName(z);
        Var inner = tape.Relu(tape.Dense(hid, tape.Param(base + "/w1"), tape.Param(base + "/b1")));
        out.eta.push_back(
            tape.Softmax(tape.Dense(inner, tape.Param(base + "/w2"), tape.Param(base + "/b2"))));
      }
      out.p = tape.Softmax(tape.Dense(hid, tape.Param("p/w"), tape.Param("p/b")));
      out.c = tape.Dense(hid, tape.Param("c/w"), tape.Param("c/b"));
      out.mu = MixPolicy(tape, out.eta, out.p);
      if (out.q.valid()) {
        out.pi = MixPolicy(tape, out.eta, out.q);
        out.V = tape.RowDot(out.q, out.c);
      } else if (variant_ == AgentVariant::kPureMix) {
        // No q network: the behavior mixture is the policy and the critic is
        // the p-weighted component mixture.
        out.pi = out.mu;
        out.V = tape.RowDot(out.p, out.c);
      }
    } else {
      Var policy = tape.Softmax(tape.Dense(hid, tape.Param("pi/w"), tape.Param("pi/b")));
      out.pi = policy;
      out.mu = policy;
      if (variant_ == AgentVariant::kBaseline || variant_ == AgentVariant::kBaselineAux) {
        out.V = tape.Dense(hid, tape.Param("v/w"), tape.Param("v/b"));
      }
      if (variant_ == AgentVariant::kBaselineAux) {
        out.aux = tape.Dense(hid, tape.Param("aux/w"), tape.Param("aux/b"));
      }
      if (variant_ == AgentVariant::kBaselineCcFact) {
        out.p = tape.Softmax(tape.Dense(hid, tape.Param("p/w"), tape.Param("p/b")));
        out.c = tape.Dense(hid, tape.Param("c/w"), tape.Param("c/b"));
        if (out.q.valid()) out.V = tape.RowDot(out.q, out.c);
      }
    }
    return out;
  }

  // weights [B,K], eta K x [B,A] -> [B,A], accumulated in option order so the
  // numeric actor path can reproduce it operation for operation.
  Var MixPolicy(Tape<Real>& tape, const std::vector<Var>& eta, Var weights) const {
    Var acc;
    for (int z = 0; z < static_cast<int>(eta.size()); ++z) {
      Var term = tape.ScaleRows(eta[z], tape.SelectCol(weights, z));
      acc = acc.valid() ? tape.Add(acc, term) : term;
    }
    return acc;
  }

  // Tape-free forward for actors. Never touches concealed inputs. Updates
  // `state` in place and samples an action from mu.
  ActResult Act(const ParameterStore<Real>& params, const Observation& obs,
                LstmState<Real>& state, Rng& rng,
                std::optional<int> forced_option = std::nullopt) const {
    NetworkOutput out = ActorForward(params, obs, state, forced_option);
    ActResult result;
    result.mu = out.mu;
    result.p = out.p;
    result.action = static_cast<int>(rng.SampleCategorical(out.mu));
    result.mu_action_prob = out.mu[static_cast<size_t>(result.action)];
    return result;
  }

  // The deterministic part of Act: policy distributions for one observation.
  NetworkOutput ActorForward(const ParameterStore<Real>& params, const Observation& obs,
                             LstmState<Real>& state,
                             std::optional<int> forced_option = std::nullopt) const {
    if (forced_option && (!HasOptionHeads() || *forced_option < 0 ||
                          *forced_option >= config_.num_options)) {
      throw std::invalid_argument("Network: invalid forced option");
    }
    Tensor<Real> x = EncodeObservation<Real>(obs);
    Tensor<Real> torso = TorsoNumeric(params, x);
    NumLstmStep(torso, state.h, state.c, params.Get("lstm/wx"), params.Get("lstm/wh"),
                params.Get("lstm/b"));
    const Tensor<Real>& hid = state.h;

    NetworkOutput out;
    if (HasOptionHeads()) {
      out.eta.resize(static_cast<size_t>(config_.num_options));
      for (int z = 0; z < config_.num_options; ++z) {
        if (forced_option && z != *forced_option) continue;
        const std::string base = OptName(z);
        Tensor<Real> inner = NumDense(hid, params.Get(base + "/w1"), params.Get(base + "/b1"));
        NumRelu(inner);
        Tensor<Real> logits = NumDense(inner, params.Get(base + "/w2"), params.Get(base + "/b2"));
        NumSoftmaxRows(logits);
        out.eta[static_cast<size_t>(z)].assign(logits.data.begin(), logits.data.end());
      }
      if (forced_option) {
        out.p.assign(static_cast<size_t>(config_.num_options), 0.0);
        out.p[static_cast<size_t>(*forced_option)] = 1.0;
        out.mu = out.eta[static_cast<size_t>(*forced_option)];
      } else {
        Tensor<Real> p_logits = NumDense(hid, params.Get("p/w"), params.Get("p/b"));
        NumSoftmaxRows(p_logits);
        out.p.assign(p_logits.data.begin(), p_logits.data.end());
        // Mirrors MixPolicy kernel for kernel so the learner reproduces mu
        // bit for bit: scale a copy of each head, then accumulate, in option
        // order.
        const int actions = config_.num_actions;
        std::vector<Real> acc(static_cast<size_t>(actions), Real(0));
        std::vector<Real> term(static_cast<size_t>(actions));
        for (int z = 0; z < config_.num_options; ++z) {
          const auto& eta_z = out.eta[static_cast<size_t>(z)];
          for (int a = 0; a < actions; ++a) term[static_cast<size_t>(a)] = static_cast<Real>(eta_z[static_cast<size_t>(a)]);
          ScaleRowInPlace(term.data(), static_cast<Real>(out.p[static_cast<size_t>(z)]), actions);
          AddRowInPlace(acc.data(), term.data(), actions);
        }
        out.mu.assign(acc.begin(), acc.end());
      }
    } else {
      Tensor<Real> logits = NumDense(hid, params.Get("pi/w"), params.Get("pi/b"));
      NumSoftmaxRows(logits);
      out.mu.assign(logits.data.begin(), logits.data.end());
    }
    return out;
  }

  static std::string OptName(int z) { return "opt" + std::to_string(z); }

 private:
  Var TorsoConvTape(Tape<Real>& tape, Var obs) const {
    Var win = tape.SliceCols(obs, 0, kObsWindowDim);
    Var extras = tape.SliceCols(obs, kObsWindowDim, kObsExtraDim);
    Var conv = tape.Relu(
        tape.Conv1d(win, kWindowCells, kObsChannels, tape.Param("conv/k"), tape.Param("conv/b")));
    return tape.ConcatCols({conv, extras});
  }

  Var TorsoTape(Tape<Real>& tape, Var obs) const {
    Var features = TorsoConvTape(tape, obs);
    Var h1 = tape.Relu(tape.Dense(features, tape.Param("torso1/w"), tape.Param("torso1/b")));
    return tape.Relu(tape.Dense(h1, tape.Param("torso2/w"), tape.Param("torso2/b")));
  }

  Tensor<Real> TorsoNumeric(const ParameterStore<Real>& params, const Tensor<Real>& x) const {
    Tensor<Real> conv =
        NumConv1d(x, kWindowCells, kObsChannels, params.Get("conv/k"), params.Get("conv/b"));
    NumRelu(conv);
    Tensor<Real> features = Tensor<Real>::Zeros({1, config_.TorsoInDim()});
    std::copy(conv.data.begin(), conv.data.end(), features.data.begin());
    std::copy(x.data.begin() + kObsWindowDim, x.data.end(),
              features.data.begin() + config_.ConvOutDim());
    Tensor<Real> h1 = NumDense(features, params.Get("torso1/w"), params.Get("torso1/b"));
    NumRelu(h1);
    Tensor<Real> h2 = NumDense(h1, params.Get("torso2/w"), params.Get("torso2/b"));
    NumRelu(h2);
    return h2;
  }

  // The Num* kernels repeat the Tape ops' arithmetic exactly (same Gemm
  // kernels, same operation order) so actor and learner policies agree bit
  // for bit.
  static Tensor<Real> NumDense(const Tensor<Real>& x, const Tensor<Real>& w,
                               const Tensor<Real>& b) {
    const int m = x.rows(), p = x.cols(), n = w.cols();
    if (w.rows() != p || b.size() != n) throw std::invalid_argument("NumDense: shape mismatch");
    Tensor<Real> out = Tensor<Real>::Zeros({m, n});
    for (int i = 0; i < m; ++i) {
      std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<size_t>(i) * n);
    }
    GemmNN(x.data.data(), w.data.data(), out.data.data(), m, p, n);
    return out;
  }

  static Tensor<Real> NumConv1d(const Tensor<Real>& x, int length, int in_ch,
                                const Tensor<Real>& kernel, const Tensor<Real>& bias) {
    const int width = kernel.rows() / in_ch;
    const int out_ch = kernel.cols();
    const int out_len = length - width + 1;
    const int batch = x.rows();
    Tensor<Real> out = Tensor<Real>::Zeros({batch, out_len * out_ch});
    for (int b = 0; b < batch; ++b) {
      const Real* row = x.data.data() + static_cast<size_t>(b) * x.cols();
      Real* orow = out.data.data() + static_cast<size_t>(b) * out.cols();
      for (int l = 0; l < out_len; ++l) {
        for (int co = 0; co < out_ch; ++co) orow[l * out_ch + co] = bias.data[co];
        GemmNN(row + static_cast<size_t>(l) * in_ch, kernel.data.data(),
               orow + static_cast<size_t>(l) * out_ch, 1, width * in_ch, out_ch);
      }
    }
    return out;
  }

  static void NumRelu(Tensor<Real>& x) {
    for (Real& v : x.data) v = std::max(v, Real(0));
  }

  static void NumSoftmaxRows(Tensor<Real>& x) {
    SoftmaxRowsInPlace(x.data.data(), x.rows(), x.cols());
  }

  static void NumLstmStep(const Tensor<Real>& x, Tensor<Real>& h, Tensor<Real>& c,
                          const Tensor<Real>& wx, const Tensor<Real>& wh, const Tensor<Real>& b) {
    const int batch = x.rows();
    const int in = x.cols();
    const int hidden = h.cols();
    Tensor<Real> gates = Tensor<Real>::Zeros({batch, 4 * hidden});
    for (int i = 0; i < batch; ++i) {
      std::copy(b.data.begin(), b.data.end(),
                gates.data.begin() + static_cast<size_t>(i) * 4 * hidden);
    }
    GemmNN(x.data.data(), wx.data.data(), gates.data.data(), batch, in, 4 * hidden);
    GemmNN(h.data.data(), wh.data.data(), gates.data.data(), batch, hidden, 4 * hidden);
    const Tensor<Real> c_prev = c;
    for (int i = 0; i < batch; ++i) {
      Real* g = gates.data.data() + static_cast<size_t>(i) * 4 * hidden;
      LstmActivateRow(g, c_prev.data.data() + static_cast<size_t>(i) * hidden,
                      h.data.data() + static_cast<size_t>(i) * hidden,
                      c.data.data() + static_cast<size_t>(i) * hidden, hidden);
    }
  }

  OpreConfig config_;
  AgentVariant variant_;
};

// Numeric view of one batch row of a TapeOutput, for invariant checks.
template <typename Real>
NetworkOutput ExtractRow(const Tape<Real>& tape, const typename Network<Real>::TapeOutput& out,
                         int row) {
  NetworkOutput result;
  auto row_of = [&](typename Tape<Real>::Var v) {
    const Tensor<Real>& t = tape.Value(v);
    std::vector<double> r(static_cast<size_t>(t.cols()));
    for (int j = 0; j < t.cols(); ++j) r[static_cast<size_t>(j)] = static_cast<double>(t.at(row, j));
    return r;
  };
  if (out.q.valid()) result.q = row_of(out.q);
  if (out.p.valid()) result.p = row_of(out.p);
  if (out.c.valid()) result.c = row_of(out.c);
  for (auto e : out.eta) result.eta.push_back(row_of(e));
  if (out.V.valid()) result.V = static_cast<double>(tape.Value(out.V).at(row, 0));
  if (out.pi.valid()) result.pi = row_of(out.pi);
  if (out.mu.valid()) result.mu = row_of(out.mu);
  return result;
}

}  // namespace opre

#endif  // OPRE_AGENT_NETWORK_HPP_

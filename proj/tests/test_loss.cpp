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

#include <cmath>

#include <catch_amalgamated.hpp>

#include "opre/learn/loss.hpp"
#include "opre/nn/gradcheck.hpp"
#include "opre/util/rng.hpp"

namespace opre {
namespace {

Observation RandomObservation(Rng& rng) {
  Observation obs;
  for (auto& cell : obs.window) {
    cell = static_cast<CellCode>(rng.UniformIndex(kObsChannels));
  }
  obs.inventory = Inventory{{static_cast<int>(rng.UniformIndex(4)) + 1,
                             static_cast<int>(rng.UniformIndex(4)) + 1,
                             static_cast<int>(rng.UniformIndex(4)) + 1}};
  obs.orientation = static_cast<Orientation>(rng.UniformIndex(4));
  return obs;
}

OpreConfig SmallConfig(int num_opponents = 1) {
  OpreConfig config;
  config.num_options = 4;
  config.torso_hidden1 = 12;
  config.torso_hidden2 = 12;
  config.lstm_hidden = 16;
  config.option_hidden = 12;
  config.q_embed = 8;
  config.q_hidden = 8;
  config.num_opponents = num_opponents;
  return config;
}

TrajectoryBatch MakeBatch(Rng& rng, const OpreConfig& config,
                          const std::vector<size_t>& lengths) {
  TrajectoryBatch batch;
  for (size_t len : lengths) {
    Trajectory traj;
    for (size_t t = 0; t < len; ++t) {
      traj.observations.push_back(RandomObservation(rng));
      std::vector<Observation> con;
      for (int j = 0; j < config.num_opponents; ++j) con.push_back(RandomObservation(rng));
      traj.concealed.push_back(std::move(con));
      traj.actions.push_back(static_cast<int>(rng.UniformIndex(kNumActions)));
      traj.behavior_probs.push_back(rng.UniformDouble(0.2, 1.0));
      traj.rewards.push_back(rng.UniformDouble(-1.0, 1.0));
    }
    traj.initial_h.assign(static_cast<size_t>(config.lstm_hidden), 0.0);
    traj.initial_c.assign(static_cast<size_t>(config.lstm_hidden), 0.0);
    traj.bootstrap_obs = RandomObservation(rng);
    for (int j = 0; j < config.num_opponents; ++j) {
      traj.bootstrap_concealed.push_back(RandomObservation(rng));
    }
    traj.terminal = rng.UniformIndex(2) == 0;
    batch.sequences.push_back(std::move(traj));
  }
  return batch;
}

bool AllZero(const Tensor<double>& t) {
  for (double v : t.data) {
    if (v != 0.0) return false;
  }
  return true;
}

const std::vector<std::string> kQNetParams = {"q/embed_w", "q/embed_b", "q/hid_w",
                                              "q/hid_b",   "q/out_w",   "q/out_b"};

TEST_CASE("policy gradient never reaches the q network under the stop rule") {
  Rng rng(101);
  OpreConfig config = SmallConfig();
  Network<double> net(config, AgentVariant::kOpre);
  ParameterStore<double> params = net.InitParams(rng);
  TrajectoryBatch batch = MakeBatch(rng, config, {5, 3, 5});
  LossResult<double> res = OpreLoss(net, batch, params, LossCoefficients{}, kLossPolicy);
  for (const auto& name : kQNetParams) {
    INFO(name);
    CHECK(AllZero(res.gradients.at(name)));
  }
  // Policy gradient does flow into the option heads and the torso.
  CHECK(!AllZero(res.gradients.at("opt0/w2")));
  CHECK(!AllZero(res.gradients.at("torso1/w")));
}

TEST_CASE("removing the stop lets the policy gradient reach q") {
  Rng rng(102);
  OpreConfig config = SmallConfig();
  Network<double> net(config, AgentVariant::kOpreQGrad);
  ParameterStore<double> params = net.InitParams(rng);
  TrajectoryBatch batch = MakeBatch(rng, config, {5, 3});
  LossResult<double> res = OpreLoss(net, batch, params, LossCoefficients{}, kLossPolicy);
  bool any_nonzero = false;
  for (const auto& name : kQNetParams) any_nonzero = any_nonzero || !AllZero(res.gradients.at(name));
  CHECK(any_nonzero);
}

TEST_CASE("behavioral-mixture policy gradient keeps q and p stops") {
  Rng rng(103);
  OpreConfig config = SmallConfig();
  Network<double> net(config, AgentVariant::kOpreMixPg);
  ParameterStore<double> params = net.InitParams(rng);
  TrajectoryBatch batch = MakeBatch(rng, config, {4, 4});
  LossResult<double> mix = ComputeLoss(net, batch, params, LossCoefficients{}, kLossPolicy);
  for (const auto& name : kQNetParams) CHECK(AllZero(mix.gradients.at(name)));
  CHECK(AllZero(mix.gradients.at("p/w")));

  Network<double> plain(config, AgentVariant::kOpre);
  LossResult<double> base = ComputeLoss(plain, batch, params, LossCoefficients{}, kLossPolicy);
  CHECK(!(mix.gradients.at("opt0/w2") == base.gradients.at("opt0/w2")));
}

TEST_CASE("pure mixture trains p by policy gradient and c by the value loss") {
  Rng rng(104);
  OpreConfig config = SmallConfig();
  Network<double> net(config, AgentVariant::kPureMix);
  ParameterStore<double> params = net.InitParams(rng);
  TrajectoryBatch batch = MakeBatch(rng, config, {4, 6});
  LossResult<double> policy = ComputeLoss(net, batch, params, LossCoefficients{}, kLossPolicy);
  CHECK(!AllZero(policy.gradients.at("p/w")));
  CHECK(AllZero(policy.gradients.at("c/w")));
  LossResult<double> value = ComputeLoss(net, batch, params, LossCoefficients{}, kLossValue);
  CHECK(AllZero(value.gradients.at("p/w")));
  CHECK(!AllZero(value.gradients.at("c/w")));
  // No q, no KL: a KL-only selection has nothing to compute.
  CHECK_THROWS_AS(ComputeLoss(net, batch, params, LossCoefficients{}, kLossKl),
                  std::invalid_argument);
}

TEST_CASE("full OPRE loss graph passes a finite-difference check at 1e-3") {
  Rng rng(105);
  OpreConfig config = SmallConfig();
  config.num_options = 3;
  config.torso_hidden1 = 8;
  config.torso_hidden2 = 8;
  config.lstm_hidden = 8;
  config.option_hidden = 8;
  config.q_embed = 6;
  config.q_hidden = 6;
  Network<double> net(config, AgentVariant::kOpre);
  ParameterStore<double> params = net.InitParams(rng);
  TrajectoryBatch batch = MakeBatch(rng, config, {3, 2});
  LossCoefficients coeffs;
  LossResult<double> base = ComputeLoss(net, batch, params, coeffs);
  // Targets fixed so the finite differences probe the differentiated graph,
  // not the target recomputation.
  const LossTargets targets = base.targets;
  LossResult<double> analytic = ComputeLoss(net, batch, params, coeffs, kLossAll, &targets);
  auto forward = [&](const ParameterStore<double>& p) {
    return ComputeLoss(net, batch, p, coeffs, kLossAll, &targets).breakdown.total;
  };
  GradCheckReport report = GradCheck(forward, params, analytic.gradients, 1e-5, 400, 7);
  INFO("max rel error " << report.max_rel_error);
  CHECK(report.Pass(1e-3));
}

TEST_CASE("baseline variants route gradients through the documented heads only") {
  Rng rng(106);
  OpreConfig config = SmallConfig();

  SECTION("counterfactual value head reaches the concealed embedding") {
    Network<double> net(config, AgentVariant::kBaselineCc);
    ParameterStore<double> params = net.InitParams(rng);
    TrajectoryBatch batch = MakeBatch(rng, config, {4, 4});
    LossResult<double> value = BaselineLoss(net, batch, params, LossCoefficients{}, kLossValue);
    CHECK(!AllZero(value.gradients.at("q/embed_w")));
    CHECK(AllZero(value.gradients.at("pi/w")));
    LossResult<double> policy = BaselineLoss(net, batch, params, LossCoefficients{}, kLossPolicy);
    CHECK(AllZero(policy.gradients.at("q/embed_w")));
    CHECK(AllZero(policy.gradients.at("v/w")));
  }

  SECTION("auxiliary head trains only on the auxiliary loss") {
    Network<double> net(config, AgentVariant::kBaselineAux);
    ParameterStore<double> params = net.InitParams(rng);
    TrajectoryBatch batch = MakeBatch(rng, config, {4, 3});
    LossResult<double> aux = BaselineLoss(net, batch, params, LossCoefficients{}, kLossAux);
    CHECK(aux.breakdown.aux_loss > 0.0);
    CHECK(!AllZero(aux.gradients.at("aux/w")));
    CHECK(AllZero(aux.gradients.at("pi/w")));
    CHECK(AllZero(aux.gradients.at("v/w")));
    LossResult<double> policy = BaselineLoss(net, batch, params, LossCoefficients{}, kLossPolicy);
    CHECK(AllZero(policy.gradients.at("aux/w")));
  }

  SECTION("factored critic keeps the policy gradient away from q") {
    Network<double> net(config, AgentVariant::kBaselineCcFact);
    ParameterStore<double> params = net.InitParams(rng);
    TrajectoryBatch batch = MakeBatch(rng, config, {4, 4});
    LossResult<double> policy = BaselineLoss(net, batch, params, LossCoefficients{}, kLossPolicy);
    for (const auto& name : kQNetParams) CHECK(AllZero(policy.gradients.at(name)));
    LossResult<double> value = BaselineLoss(net, batch, params, LossCoefficients{}, kLossValue);
    CHECK(!AllZero(value.gradients.at("q/out_w")));
    LossResult<double> kl = BaselineLoss(net, batch, params, LossCoefficients{}, kLossKl);
    CHECK(!AllZero(kl.gradients.at("q/out_w")));
    CHECK(!AllZero(kl.gradients.at("p/w")));
  }

  SECTION("variant wrappers reject the wrong family") {
    Network<double> opre_net(config, AgentVariant::kOpre);
    Network<double> base_net(config, AgentVariant::kBaseline);
    ParameterStore<double> p1 = opre_net.InitParams(rng);
    TrajectoryBatch batch = MakeBatch(rng, config, {3});
    CHECK_THROWS_AS(BaselineLoss(opre_net, batch, p1, LossCoefficients{}), std::invalid_argument);
    ParameterStore<double> p2 = base_net.InitParams(rng);
    CHECK_THROWS_AS(OpreLoss(base_net, batch, p2, LossCoefficients{}), std::invalid_argument);
  }
}

TEST_CASE("entropy regularizer statistics match their closed forms") {
  // q one-hot and constant within each episode: H^T = 0.
  std::vector<std::vector<std::vector<double>>> q_onehot;
  for (int b = 0; b < 4; ++b) {
    std::vector<double> dist(16, 0.0);
    dist[static_cast<size_t>(b)] = 1.0;
    q_onehot.push_back(std::vector<std::vector<double>>(7, dist));
  }
  EntropyRegTerms terms = EntropyReg(q_onehot, {});
  CHECK(terms.ht == Catch::Approx(0.0).margin(1e-12));

  // 16 episodes locked to 16 distinct options: H^B = ln 16.
  std::vector<std::vector<std::vector<double>>> q_locked;
  for (int b = 0; b < 16; ++b) {
    std::vector<double> dist(16, 0.0);
    dist[static_cast<size_t>(b)] = 1.0;
    q_locked.push_back(std::vector<std::vector<double>>(5, dist));
  }
  CHECK(EntropyReg(q_locked, {}).hb == Catch::Approx(std::log(16.0)).margin(1e-12));

  // Uniform policy over 8 actions: H(pi) = ln 8.
  std::vector<std::vector<std::vector<double>>> pi_uniform = {
      std::vector<std::vector<double>>(3, std::vector<double>(8, 1.0 / 8))};
  CHECK(EntropyReg(q_onehot, pi_uniform).hpi == Catch::Approx(std::log(8.0)).margin(1e-12));
}

TEST_CASE("graph regularizer terms agree with the numeric oracle") {
  Rng rng(107);
  OpreConfig config = SmallConfig();
  Network<double> net(config, AgentVariant::kOpre);
  ParameterStore<double> params = net.InitParams(rng);
  TrajectoryBatch batch = MakeBatch(rng, config, {5, 3, 4});
  LossCoefficients coeffs;
  LossResult<double> res = ComputeLoss(net, batch, params, coeffs);

  // Recompute q and pi sequences with independent per-sequence forwards.
  std::vector<std::vector<std::vector<double>>> q_seqs, pi_seqs;
  for (const Trajectory& seq : batch.sequences) {
    Tape<double> tape(&params);
    auto h = tape.Constant(Tensor<double>::Zeros({1, config.lstm_hidden}));
    auto c = tape.Constant(Tensor<double>::Zeros({1, config.lstm_hidden}));
    std::vector<std::vector<double>> qs, pis;
    for (size_t t = 0; t < seq.Length(); ++t) {
      auto out = net.Forward(tape, tape.Constant(EncodeObservation<double>(seq.observations[t])),
                             {tape.Constant(EncodeObservation<double>(seq.concealed[t][0]))}, h, c);
      h = tape.LstmOutput(out.hc);
      c = tape.LstmCell(out.hc);
      qs.push_back(tape.Value(out.q).data);
      pis.push_back(tape.Value(out.pi).data);
    }
    q_seqs.push_back(std::move(qs));
    pi_seqs.push_back(std::move(pis));
  }
  EntropyRegTerms oracle = EntropyReg(q_seqs, pi_seqs);
  CHECK(res.breakdown.reg_Ht == Catch::Approx(oracle.ht).margin(1e-9));
  CHECK(res.breakdown.reg_Hb == Catch::Approx(oracle.hb).margin(1e-9));
  CHECK(res.breakdown.reg_Hpi == Catch::Approx(oracle.hpi).margin(1e-9));
  CHECK(res.breakdown.kl_qp >= 0.0);
}

TEST_CASE("total is the recorded weighted sum of components") {
  Rng rng(108);
  OpreConfig config = SmallConfig();
  Network<double> net(config, AgentVariant::kOpre);
  ParameterStore<double> params = net.InitParams(rng);
  TrajectoryBatch batch = MakeBatch(rng, config, {4, 4});
  LossCoefficients coeffs;
  coeffs.lambda_v = 0.7;
  coeffs.lambda_kl = 0.3;
  coeffs.lambda_reg = 0.05;
  coeffs.lambda_ent = 0.02;
  LossResult<double> res = ComputeLoss(net, batch, params, coeffs);
  const LossBreakdown& b = res.breakdown;
  const double expected = b.policy_loss + coeffs.lambda_v * b.value_loss +
                          coeffs.lambda_kl * b.kl_qp + coeffs.lambda_reg * (b.reg_Ht - b.reg_Hb) -
                          coeffs.lambda_ent * b.reg_Hpi;
  CHECK(b.total == Catch::Approx(expected).margin(1e-9));
}

TEST_CASE("loss and gradients are bit-reproducible") {
  Rng rng(109);
  OpreConfig config = SmallConfig();
  Network<float> net(config, AgentVariant::kOpre);
  ParameterStore<float> params = net.InitParams(rng);
  TrajectoryBatch batch = MakeBatch(rng, config, {6, 4});
  LossResult<float> a = ComputeLoss(net, batch, params, LossCoefficients{});
  LossResult<float> b = ComputeLoss(net, batch, params, LossCoefficients{});
  CHECK(a.breakdown.total == b.breakdown.total);
  for (const auto& [name, grad] : a.gradients) {
    CHECK(grad == b.gradients.at(name));
  }
}

TEST_CASE("malformed batches are rejected") {
  Rng rng(110);
  OpreConfig config = SmallConfig();
  Network<double> net(config, AgentVariant::kOpre);
  ParameterStore<double> params = net.InitParams(rng);

  TrajectoryBatch empty;
  CHECK_THROWS_AS(ComputeLoss(net, empty, params, LossCoefficients{}), std::invalid_argument);

  TrajectoryBatch bad = MakeBatch(rng, config, {3});
  bad.sequences[0].behavior_probs[1] = 0.0;
  CHECK_THROWS_AS(ComputeLoss(net, bad, params, LossCoefficients{}), std::invalid_argument);

  TrajectoryBatch misaligned = MakeBatch(rng, config, {3});
  misaligned.sequences[0].rewards.pop_back();
  CHECK_THROWS_AS(ComputeLoss(net, misaligned, params, LossCoefficients{}), std::invalid_argument);
}

}  // namespace
}  // namespace opre

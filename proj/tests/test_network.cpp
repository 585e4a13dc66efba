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
#include <numeric>

#include <catch_amalgamated.hpp>

#include "opre/agent/network.hpp"
#include "opre/util/rng.hpp"

namespace opre {
namespace {

Observation RandomObservation(Rng& rng) {
  Observation obs;
  for (auto& cell : obs.window) {
    cell = static_cast<CellCode>(rng.UniformIndex(kObsChannels));
  }
  obs.inventory = Inventory{{static_cast<int>(rng.UniformIndex(5)) + 1,
                             static_cast<int>(rng.UniformIndex(5)) + 1,
                             static_cast<int>(rng.UniformIndex(5)) + 1}};
  obs.orientation = static_cast<Orientation>(rng.UniformIndex(4));
  return obs;
}

std::vector<Observation> RandomObservations(Rng& rng, int n) {
  std::vector<Observation> out;
  for (int i = 0; i < n; ++i) out.push_back(RandomObservation(rng));
  return out;
}

OpreConfig SmallConfig(int num_opponents = 1) {
  OpreConfig config;
  config.num_options = 4;
  config.torso_hidden1 = 16;
  config.torso_hidden2 = 16;
  config.lstm_hidden = 24;
  config.option_hidden = 16;
  config.q_embed = 12;
  config.q_hidden = 12;
  config.num_opponents = num_opponents;
  return config;
}

double SumOf(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST_CASE("observation encoding is one-hot window plus normalized inventory") {
  Rng rng(21);
  Observation obs = RandomObservation(rng);
  obs.inventory = Inventory{{2, 1, 1}};
  obs.orientation = Orientation::kSouth;
  Tensor<double> x = EncodeObservation<double>(obs);
  REQUIRE(x.cols() == kObsDim);
  double window_sum = 0;
  for (int i = 0; i < kObsWindowDim; ++i) {
    CHECK((x.data[i] == 0.0 || x.data[i] == 1.0));
    window_sum += x.data[i];
  }
  CHECK(window_sum == kWindowCells);
  CHECK(x.data[kObsWindowDim + 0] == 0.5);
  CHECK(x.data[kObsWindowDim + 1] == 0.25);
  CHECK(x.data[kObsWindowDim + 2] == 0.25);
  for (int o = 0; o < 4; ++o) {
    CHECK(x.data[kObsWindowDim + 3 + o] == (o == static_cast<int>(Orientation::kSouth) ? 1.0 : 0.0));
  }
}

TEST_CASE("mixture identities hold on the learner forward pass") {
  using Net = Network<double>;
  Net net(SmallConfig(), AgentVariant::kOpre);
  Rng rng(22);
  ParameterStore<double> params = net.InitParams(rng);
  const int batch = 3;
  Tape<double> tape(&params);
  auto obs = tape.Constant(EncodeObservationBatch<double>(RandomObservations(rng, batch)));
  auto con = tape.Constant(EncodeObservationBatch<double>(RandomObservations(rng, batch)));
  auto h = tape.Constant(Tensor<double>::Zeros({batch, net.config().lstm_hidden}));
  auto c = tape.Constant(Tensor<double>::Zeros({batch, net.config().lstm_hidden}));
  Net::TapeOutput out = net.Forward(tape, obs, {con}, h, c);

  for (int b = 0; b < batch; ++b) {
    NetworkOutput row = ExtractRow(tape, out, b);
    REQUIRE(row.q.size() == 4);
    REQUIRE(row.eta.size() == 4);
    CHECK(SumOf(row.q) == Catch::Approx(1.0).margin(1e-6));
    CHECK(SumOf(row.p) == Catch::Approx(1.0).margin(1e-6));
    CHECK(SumOf(row.pi) == Catch::Approx(1.0).margin(1e-6));
    CHECK(SumOf(row.mu) == Catch::Approx(1.0).margin(1e-6));
    double v = 0;
    for (size_t z = 0; z < row.q.size(); ++z) v += row.q[z] * row.c[z];
    CHECK(row.V == Catch::Approx(v).margin(1e-6));
    for (size_t a = 0; a < row.pi.size(); ++a) {
      double pi = 0, mu = 0;
      for (size_t z = 0; z < row.q.size(); ++z) {
        pi += row.q[z] * row.eta[z][a];
        mu += row.p[z] * row.eta[z][a];
      }
      CHECK(row.pi[a] == Catch::Approx(pi).margin(1e-6));
      CHECK(row.mu[a] == Catch::Approx(mu).margin(1e-6));
    }
  }
}

TEST_CASE("actor and learner behavior policies agree bit for bit") {
  using Net = Network<float>;
  Net net(SmallConfig(), AgentVariant::kOpre);
  Rng rng(23);
  ParameterStore<float> params = net.InitParams(rng);
  LstmState<float> actor_state = LstmState<float>::Zero(1, net.config().lstm_hidden);
  Tensor<float> h = Tensor<float>::Zeros({1, net.config().lstm_hidden});
  Tensor<float> c = Tensor<float>::Zeros({1, net.config().lstm_hidden});
  for (int t = 0; t < 5; ++t) {
    Observation obs = RandomObservation(rng);
    NetworkOutput actor_out = net.ActorForward(params, obs, actor_state);
    Tape<float> tape(&params);
    auto out = net.Forward(tape, tape.Constant(EncodeObservation<float>(obs)), {},
                           tape.Constant(h), tape.Constant(c));
    h = tape.Value(tape.LstmOutput(out.hc));
    c = tape.Value(tape.LstmCell(out.hc));
    NetworkOutput learner_out = ExtractRow(tape, out, 0);
    REQUIRE(actor_out.mu.size() == learner_out.mu.size());
    for (size_t a = 0; a < actor_out.mu.size(); ++a) {
      CHECK(actor_out.mu[a] == learner_out.mu[a]);
    }
    CHECK(actor_state.h == h);
    CHECK(actor_state.c == c);
  }
}

TEST_CASE("perturbing concealed inputs changes q but not the actor-visible outputs") {
  using Net = Network<double>;
  Net net(SmallConfig(), AgentVariant::kOpre);
  Rng rng(24);
  ParameterStore<double> params = net.InitParams(rng);
  const int batch = 2;
  Tensor<double> obs_t = EncodeObservationBatch<double>(RandomObservations(rng, batch));
  Tensor<double> con_a = EncodeObservationBatch<double>(RandomObservations(rng, batch));
  Tensor<double> con_b = EncodeObservationBatch<double>(RandomObservations(rng, batch));
  REQUIRE(!(con_a == con_b));
  auto run = [&](const Tensor<double>& con) {
    Tape<double> tape(&params);
    auto out = net.Forward(tape, tape.Constant(obs_t), {tape.Constant(con)},
                           tape.Constant(Tensor<double>::Zeros({batch, net.config().lstm_hidden})),
                           tape.Constant(Tensor<double>::Zeros({batch, net.config().lstm_hidden})));
    std::vector<NetworkOutput> rows;
    for (int b = 0; b < batch; ++b) rows.push_back(ExtractRow(tape, out, b));
    return rows;
  };
  auto rows_a = run(con_a);
  auto rows_b = run(con_b);
  for (int b = 0; b < batch; ++b) {
    CHECK(rows_a[b].q != rows_b[b].q);
    CHECK(rows_a[b].p == rows_b[b].p);
    CHECK(rows_a[b].mu == rows_b[b].mu);
    for (size_t z = 0; z < rows_a[b].eta.size(); ++z) {
      CHECK(rows_a[b].eta[z] == rows_b[b].eta[z]);
    }
  }
}

TEST_CASE("uniform p over identical option heads collapses the mixture") {
  using Net = Network<double>;
  Net net(SmallConfig(), AgentVariant::kOpre);
  Rng rng(25);
  ParameterStore<double> params = net.InitParams(rng);
  // All option heads share head 0's weights; zeroed p head gives uniform p.
  for (int z = 1; z < net.config().num_options; ++z) {
    for (const char* part : {"/w1", "/b1", "/w2", "/b2"}) {
      params.Mutable(Net::OptName(z) + part) = params.Get(Net::OptName(0) + part);
    }
  }
  params.Mutable("p/w") = Tensor<double>::Zeros(params.Get("p/w").shape);
  params.Mutable("p/b") = Tensor<double>::Zeros(params.Get("p/b").shape);
  LstmState<double> state = LstmState<double>::Zero(1, net.config().lstm_hidden);
  NetworkOutput out = net.ActorForward(params, RandomObservation(rng), state);
  for (double pz : out.p) CHECK(pz == Catch::Approx(0.25).margin(1e-12));
  for (size_t a = 0; a < out.mu.size(); ++a) {
    CHECK(out.mu[a] == Catch::Approx(out.eta[0][a]).margin(1e-12));
  }
}

TEST_CASE("forced option sets mu to that option head, independent of the p head") {
  using Net = Network<double>;
  Net net(SmallConfig(), AgentVariant::kOpre);
  Rng rng(26);
  ParameterStore<double> params = net.InitParams(rng);
  Observation obs = RandomObservation(rng);
  LstmState<double> s1 = LstmState<double>::Zero(1, net.config().lstm_hidden);
  NetworkOutput forced = net.ActorForward(params, obs, s1, 3);
  CHECK(forced.p == std::vector<double>{0, 0, 0, 1});
  CHECK(forced.mu == forced.eta[3]);
  LstmState<double> s2 = LstmState<double>::Zero(1, net.config().lstm_hidden);
  NetworkOutput free = net.ActorForward(params, obs, s2);
  CHECK(forced.mu == free.eta[3]);
  // Scrambling the p head must not move the forced-option policy.
  for (double& v : params.Mutable("p/w").data) v += 7.5;
  LstmState<double> s3 = LstmState<double>::Zero(1, net.config().lstm_hidden);
  NetworkOutput forced2 = net.ActorForward(params, obs, s3, 3);
  CHECK(forced.mu == forced2.mu);

  LstmState<double> s4 = LstmState<double>::Zero(1, net.config().lstm_hidden);
  CHECK_THROWS_AS(net.ActorForward(params, obs, s4, 4), std::invalid_argument);
}

TEST_CASE("pure mixture variant has no q network and a p-weighted critic") {
  using Net = Network<double>;
  Net net(SmallConfig(), AgentVariant::kPureMix);
  Rng rng(27);
  ParameterStore<double> params = net.InitParams(rng);
  CHECK(!params.Has("q/embed_w"));
  CHECK(!params.Has("q/out_w"));
  const int batch = 2;
  Tape<double> tape(&params);
  auto out = net.Forward(tape, tape.Constant(EncodeObservationBatch<double>(RandomObservations(rng, batch))),
                         {},
                         tape.Constant(Tensor<double>::Zeros({batch, net.config().lstm_hidden})),
                         tape.Constant(Tensor<double>::Zeros({batch, net.config().lstm_hidden})));
  for (int b = 0; b < batch; ++b) {
    NetworkOutput row = ExtractRow(tape, out, b);
    CHECK(row.q.empty());
    CHECK(row.pi == row.mu);
    double v = 0;
    for (size_t z = 0; z < row.p.size(); ++z) v += row.p[z] * row.c[z];
    CHECK(row.V == Catch::Approx(v).margin(1e-9));
  }
}

TEST_CASE("flat baseline ignores concealed inputs entirely") {
  using Net = Network<double>;
  Net net(SmallConfig(), AgentVariant::kBaseline);
  Rng rng(28);
  ParameterStore<double> params = net.InitParams(rng);
  CHECK(!params.Has("q/embed_w"));
  CHECK(!params.Has("p/w"));
  const int batch = 2;
  Tensor<double> obs_t = EncodeObservationBatch<double>(RandomObservations(rng, batch));
  auto run = [&](const Tensor<double>& con) {
    Tape<double> tape(&params);
    auto out = net.Forward(tape, tape.Constant(obs_t), {tape.Constant(con)},
                           tape.Constant(Tensor<double>::Zeros({batch, net.config().lstm_hidden})),
                           tape.Constant(Tensor<double>::Zeros({batch, net.config().lstm_hidden})));
    return std::pair{tape.Value(out.pi), tape.Value(out.V)};
  };
  auto a = run(EncodeObservationBatch<double>(RandomObservations(rng, batch)));
  auto b = run(EncodeObservationBatch<double>(RandomObservations(rng, batch)));
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("counterfactual baseline feeds concealed inputs to the value head only") {
  using Net = Network<double>;
  Net net(SmallConfig(), AgentVariant::kBaselineCc);
  Rng rng(29);
  ParameterStore<double> params = net.InitParams(rng);
  CHECK(params.Has("q/embed_w"));
  CHECK(!params.Has("q/out_w"));
  const int batch = 2;
  Tensor<double> obs_t = EncodeObservationBatch<double>(RandomObservations(rng, batch));
  auto run = [&](const Tensor<double>& con) {
    Tape<double> tape(&params);
    auto out = net.Forward(tape, tape.Constant(obs_t), {tape.Constant(con)},
                           tape.Constant(Tensor<double>::Zeros({batch, net.config().lstm_hidden})),
                           tape.Constant(Tensor<double>::Zeros({batch, net.config().lstm_hidden})));
    return std::pair{tape.Value(out.pi), tape.Value(out.V)};
  };
  auto a = run(EncodeObservationBatch<double>(RandomObservations(rng, batch)));
  auto b = run(EncodeObservationBatch<double>(RandomObservations(rng, batch)));
  CHECK(a.first == b.first);
  CHECK(!(a.second == b.second));
}

TEST_CASE("auxiliary baseline predicts 3 values per opponent") {
  using Net = Network<double>;
  const int opponents = 4;
  Net net(SmallConfig(opponents), AgentVariant::kBaselineAux);
  Rng rng(30);
  ParameterStore<double> params = net.InitParams(rng);
  const int batch = 2;
  Tape<double> tape(&params);
  std::vector<Tape<double>::Var> concealed;
  for (int j = 0; j < opponents; ++j) {
    concealed.push_back(tape.Constant(EncodeObservationBatch<double>(RandomObservations(rng, batch))));
  }
  auto out = net.Forward(tape, tape.Constant(EncodeObservationBatch<double>(RandomObservations(rng, batch))),
                         concealed,
                         tape.Constant(Tensor<double>::Zeros({batch, net.config().lstm_hidden})),
                         tape.Constant(Tensor<double>::Zeros({batch, net.config().lstm_hidden})));
  REQUIRE(out.aux.valid());
  CHECK(tape.Value(out.aux).cols() == 3 * opponents);
}

TEST_CASE("factored-critic baseline mixes value components with q") {
  using Net = Network<double>;
  Net net(SmallConfig(), AgentVariant::kBaselineCcFact);
  Rng rng(31);
  ParameterStore<double> params = net.InitParams(rng);
  CHECK(params.Has("pi/w"));
  CHECK(params.Has("q/out_w"));
  CHECK(!params.Has("opt0/w1"));
  const int batch = 2;
  Tape<double> tape(&params);
  auto out = net.Forward(tape, tape.Constant(EncodeObservationBatch<double>(RandomObservations(rng, batch))),
                         {tape.Constant(EncodeObservationBatch<double>(RandomObservations(rng, batch)))},
                         tape.Constant(Tensor<double>::Zeros({batch, net.config().lstm_hidden})),
                         tape.Constant(Tensor<double>::Zeros({batch, net.config().lstm_hidden})));
  for (int b = 0; b < batch; ++b) {
    NetworkOutput row = ExtractRow(tape, out, b);
    REQUIRE(row.q.size() == 4);
    double v = 0;
    for (size_t z = 0; z < row.q.size(); ++z) v += row.q[z] * row.c[z];
    CHECK(row.V == Catch::Approx(v).margin(1e-9));
    CHECK(row.pi == row.mu);
  }
}

TEST_CASE("q network pools a two-player and a five-player game correctly") {
  using Net = Network<double>;
  // Order invariance of sum pooling: permuting opponents leaves q unchanged.
  const int opponents = 4;
  Net net(SmallConfig(opponents), AgentVariant::kOpre);
  Rng rng(32);
  ParameterStore<double> params = net.InitParams(rng);
  const int batch = 2;
  Tensor<double> obs_t = EncodeObservationBatch<double>(RandomObservations(rng, batch));
  std::vector<Tensor<double>> cons;
  for (int j = 0; j < opponents; ++j) {
    cons.push_back(EncodeObservationBatch<double>(RandomObservations(rng, batch)));
  }
  auto run = [&](const std::vector<Tensor<double>>& order) {
    Tape<double> tape(&params);
    std::vector<Tape<double>::Var> concealed;
    for (const auto& t : order) concealed.push_back(tape.Constant(t));
    auto out = net.Forward(tape, tape.Constant(obs_t), concealed,
                           tape.Constant(Tensor<double>::Zeros({batch, net.config().lstm_hidden})),
                           tape.Constant(Tensor<double>::Zeros({batch, net.config().lstm_hidden})));
    return tape.Value(out.q);
  };
  Tensor<double> q1 = run(cons);
  std::reverse(cons.begin(), cons.end());
  Tensor<double> q2 = run(cons);
  for (size_t i = 0; i < q1.data.size(); ++i) {
    CHECK(q1.data[i] == Catch::Approx(q2.data[i]).margin(1e-12));
  }

  Net rws(SmallConfig(1), AgentVariant::kOpre);
  Rng rng2(33);
  ParameterStore<double> p2 = rws.InitParams(rng2);
  Tape<double> tape(&p2);
  CHECK_THROWS_AS(
      rws.Forward(tape, tape.Constant(obs_t),
                  {tape.Constant(cons[0]), tape.Constant(cons[1])},
                  tape.Constant(Tensor<double>::Zeros({batch, rws.config().lstm_hidden})),
                  tape.Constant(Tensor<double>::Zeros({batch, rws.config().lstm_hidden}))),
      std::invalid_argument);
}

TEST_CASE("default architecture has the published head structure") {
  using Net = Network<float>;
  OpreConfig config;
  Net net(config, AgentVariant::kOpre);
  Rng rng(34);
  ParameterStore<float> params = net.InitParams(rng);
  CHECK(params.Has("opt15/w2"));
  CHECK(params.Get("opt0/w1").shape == std::vector<int>{128, 128});
  CHECK(params.Get("opt0/w2").shape == std::vector<int>{128, 8});
  CHECK(params.Get("p/w").shape == std::vector<int>{128, 16});
  CHECK(params.Get("c/w").shape == std::vector<int>{128, 16});
  CHECK(params.Get("conv/k").shape == std::vector<int>{18, 6});
  CHECK(params.Get("torso1/w").shape == std::vector<int>{91, 64});
  CHECK(params.Get("lstm/wx").shape == std::vector<int>{64, 512});
  // Forget-gate bias starts open.
  for (int j = 128; j < 256; ++j) CHECK(params.Get("lstm/b").data[j] == 1.0f);
  CHECK(params.Get("lstm/b").data[0] == 0.0f);
}

TEST_CASE("sampled actions follow mu and report its probability") {
  using Net = Network<double>;
  Net net(SmallConfig(), AgentVariant::kOpre);
  Rng rng(35);
  ParameterStore<double> params = net.InitParams(rng);
  Observation obs = RandomObservation(rng);
  std::vector<int> counts(kNumActions, 0);
  std::vector<double> mu;
  Rng sample_rng(99);
  for (int i = 0; i < 20000; ++i) {
    LstmState<double> state = LstmState<double>::Zero(1, net.config().lstm_hidden);
    ActResult r = net.Act(params, obs, state, sample_rng);
    counts[static_cast<size_t>(r.action)] += 1;
    CHECK(r.mu_action_prob == r.mu[static_cast<size_t>(r.action)]);
    mu = r.mu;
  }
  for (int a = 0; a < kNumActions; ++a) {
    const double expect = 20000.0 * mu[static_cast<size_t>(a)];
    const double sigma = std::sqrt(20000.0 * mu[static_cast<size_t>(a)] *
                                   (1.0 - mu[static_cast<size_t>(a)]));
    CHECK(std::abs(counts[static_cast<size_t>(a)] - expect) <= 4.0 * sigma + 1.0);
  }
}

}  // namespace
}  // namespace opre

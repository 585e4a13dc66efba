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
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <catch_amalgamated.hpp>

#include "opre/learn/optimizer.hpp"
#include "opre/nn/checkpoint.hpp"
#include "opre/nn/tape.hpp"
#include "opre/util/rng.hpp"

namespace opre {
namespace {

namespace fs = std::filesystem;

Tensor<double> RandomTensor(Rng& rng, std::vector<int> shape, double scale = 1.0) {
  Tensor<double> t = Tensor<double>::Zeros(std::move(shape));
  for (double& v : t.data) v = rng.UniformDouble(-scale, scale);
  return t;
}

TEST_CASE("zero gradients leave parameters unchanged but bump the version") {
  Rng rng(201);
  ParameterStore<double> params;
  params.Add("w", RandomTensor(rng, {3, 3}));
  const Tensor<double> before = params.Get("w");
  Adam<double> adam;
  GradientMap<double> grads;
  grads["w"] = Tensor<double>::Zeros({3, 3});
  CHECK(adam.Apply(params, grads));
  CHECK(params.Get("w") == before);
  CHECK(params.version() == 1);
  CHECK(adam.last_grad_norm() == 0.0);
}

TEST_CASE("global norm clipping scales a norm-400 gradient by 0.1") {
  ParameterStore<double> params;
  params.Add("w", Tensor<double>::Scalar(1.0));
  AdamConfig config;
  Adam<double> adam(config);
  GradientMap<double> grads;
  grads["w"] = Tensor<double>::Scalar(400.0);
  REQUIRE(adam.Apply(params, grads));
  CHECK(adam.last_grad_norm() == 400.0);
  // After clipping g = 40: m-hat = 40, v-hat = 1600, update = lr * 40/(40+eps).
  const double expected =
      1.0 - config.learning_rate * 40.0 / (std::sqrt(1600.0) + config.epsilon);
  CHECK(params.Get("w").data[0] == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("non-finite gradients skip the update") {
  Rng rng(202);
  ParameterStore<double> params;
  params.Add("w", RandomTensor(rng, {2, 2}));
  const Tensor<double> before = params.Get("w");
  Adam<double> adam;
  GradientMap<double> grads;
  grads["w"] = Tensor<double>::Full({2, 2}, std::nan(""));
  CHECK(!adam.Apply(params, grads));
  CHECK(params.Get("w") == before);
  CHECK(params.version() == 0);
  CHECK(adam.step() == 0);
  CHECK(adam.skipped_updates() == 1);
}

TEST_CASE("identical state and gradients give identical updates") {
  Rng rng(203);
  GradientMap<double> grads;
  grads["w"] = RandomTensor(rng, {4, 4});
  auto run = [&]() {
    Rng r2(42);
    ParameterStore<double> params;
    params.Add("w", RandomTensor(r2, {4, 4}));
    Adam<double> adam;
    for (int i = 0; i < 5; ++i) adam.Apply(params, grads);
    return params.Get("w");
  };
  CHECK(run() == run());
}

TEST_CASE("adam drives a quadratic to its minimum") {
  Rng rng(204);
  ParameterStore<double> params;
  params.Add("w", RandomTensor(rng, {2, 3}, 5.0));
  AdamConfig config;
  config.learning_rate = 0.05;
  Adam<double> adam(config);
  for (int i = 0; i < 2000; ++i) {
    Tape<double> tape(&params);
    auto w = tape.Param("w");
    auto diff = tape.Sub(w, tape.Constant(Tensor<double>::Full({2, 3}, 3.0)));
    adam.Apply(params, tape.Backward(tape.Sum(tape.Square(diff))));
  }
  for (double v : params.Get("w").data) CHECK(v == Catch::Approx(3.0).margin(1e-2));
}

TEST_CASE("checkpoint round-trips parameters exactly") {
  Rng rng(205);
  ParameterStore<float> params;
  params.Add("a/w", RandomTensor(rng, {7, 3}).Cast<float>());
  params.Add("a/b", RandomTensor(rng, {1, 3}).Cast<float>());
  params.set_version(12345);
  const fs::path path = fs::temp_directory_path() / "opre_test_ckpt.bin";
  SaveCheckpoint(path.string(), params);
  LoadedCheckpoint loaded = LoadCheckpoint(path.string());
  CHECK(loaded.params.Names() == params.Names());
  CHECK(loaded.params.version() == 12345);
  CHECK(loaded.params.Get("a/w") == params.Get("a/w"));
  CHECK(loaded.params.Get("a/b") == params.Get("a/b"));
  CHECK(loaded.arch_hash == params.ArchHash());
  CHECK(!loaded.optimizer.has_value());
  fs::remove(path);
}

TEST_CASE("tampered checkpoints are rejected") {
  Rng rng(206);
  ParameterStore<float> params;
  params.Add("w", RandomTensor(rng, {2, 2}).Cast<float>());
  const fs::path path = fs::temp_directory_path() / "opre_test_ckpt_tamper.bin";
  SaveCheckpoint(path.string(), params);
  {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(0);
    f.write("XX", 2);
  }
  CHECK_THROWS_AS(LoadCheckpoint(path.string()), std::runtime_error);
  CHECK_THROWS_AS(LoadCheckpoint("/nonexistent/opre.ckpt"), std::runtime_error);
  fs::remove(path);
}

TEST_CASE("restart from a checkpoint reproduces training bit for bit") {
  Rng rng(207);
  ParameterStore<float> params;
  params.Add("w", RandomTensor(rng, {5, 5}).Cast<float>());
  Adam<float> adam;
  std::vector<GradientMap<float>> grads;
  for (int i = 0; i < 6; ++i) {
    GradientMap<float> g;
    g["w"] = RandomTensor(rng, {5, 5}).Cast<float>();
    grads.push_back(std::move(g));
  }
  for (int i = 0; i < 3; ++i) adam.Apply(params, grads[static_cast<size_t>(i)]);

  const fs::path path = fs::temp_directory_path() / "opre_test_ckpt_restart.bin";
  OptimizerSnapshot snap{adam.step(), adam.first_moments(), adam.second_moments()};
  SaveCheckpoint(path.string(), params, &snap);

  for (int i = 3; i < 6; ++i) adam.Apply(params, grads[static_cast<size_t>(i)]);
  const Tensor<float> direct = params.Get("w");

  LoadedCheckpoint loaded = LoadCheckpoint(path.string());
  REQUIRE(loaded.optimizer.has_value());
  Adam<float> resumed;
  resumed.RestoreState(loaded.optimizer->step, loaded.optimizer->m, loaded.optimizer->v);
  for (int i = 3; i < 6; ++i) resumed.Apply(loaded.params, grads[static_cast<size_t>(i)]);
  CHECK(loaded.params.Get("w") == direct);
  fs::remove(path);
}

TEST_CASE("unknown gradient names are an error") {
  ParameterStore<double> params;
  params.Add("w", Tensor<double>::Scalar(0.0));
  Adam<double> adam;
  GradientMap<double> grads;
  grads["typo"] = Tensor<double>::Scalar(1.0);
  CHECK_THROWS_AS(adam.Apply(params, grads), std::invalid_argument);
}

}  // namespace
}  // namespace opre

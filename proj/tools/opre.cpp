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
//
// Command-line entry point: training, evaluation, tournaments, option probes
// and replay rendering, all driven by JSON configs and checkpoint files.
//
// Exit codes: 0 success, 2 config error, 3 missing artifact, 4 runtime
// failure. Flags with an OPRE_ environment variable fall back to it when the
// flag is absent.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "opre/eval/evaluate.hpp"
#include "opre/eval/nash.hpp"
#include "opre/eval/probe.hpp"
#include "opre/eval/tournament.hpp"
#include "opre/game/replay.hpp"
#include "opre/harness/train.hpp"

namespace opre {
namespace {

namespace fs = std::filesystem;

constexpr int kExitConfigError = 2;
constexpr int kExitMissingArtifact = 3;
constexpr int kExitRuntimeFailure = 4;

struct MissingArtifactError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

OpreConfig NetworkConfigFromJson(const nlohmann::json& n) {
  OpreConfig config;
  config.num_options = n.at("num_options").get<int>();
  config.conv_channels = n.at("conv_channels").get<int>();
  config.conv_width = n.at("conv_width").get<int>();
  config.torso_hidden1 = n.at("torso_hidden1").get<int>();
  config.torso_hidden2 = n.at("torso_hidden2").get<int>();
  config.lstm_hidden = n.at("lstm_hidden").get<int>();
  config.option_hidden = n.at("option_hidden").get<int>();
  config.q_embed = n.at("q_embed").get<int>();
  config.q_hidden = n.at("q_hidden").get<int>();
  config.num_opponents = n.at("num_opponents").get<int>();
  return config;
}

// One checkpoint plus the sibling metadata.json that describes it.
struct LoadedAgent {
  std::string id;
  AgentVariant variant = AgentVariant::kOpre;
  OpreConfig network;
  ParamSnapshot params;
  std::string preset_name;
};

LoadedAgent LoadAgent(const std::string& checkpoint_path) {
  if (!fs::exists(checkpoint_path)) {
    throw MissingArtifactError("checkpoint not found: " + checkpoint_path);
  }
  const fs::path meta_path = fs::path(checkpoint_path).parent_path() / "metadata.json";
  if (!fs::exists(meta_path)) {
    throw MissingArtifactError("metadata not found next to checkpoint: " + meta_path.string());
  }
  std::ifstream meta_in(meta_path);
  nlohmann::json meta = nlohmann::json::parse(meta_in);

  LoadedAgent agent;
  agent.id = meta.at("agent_id").get<std::string>();
  agent.variant = VariantFromName(meta.at("variant").get<std::string>());
  agent.network = NetworkConfigFromJson(meta.at("network"));
  agent.preset_name = meta.value("preset", std::string("rws"));

  LoadedCheckpoint loaded = LoadCheckpoint(checkpoint_path);
  if (loaded.arch_hash != meta.at("arch_hash").get<std::string>()) {
    throw std::runtime_error("checkpoint architecture does not match its metadata: " +
                             checkpoint_path);
  }
  agent.params = std::make_shared<const ParameterStore<float>>(std::move(loaded.params));
  return agent;
}

// Latest step_*.ckpt inside one agent directory.
std::string LatestCheckpointIn(const fs::path& agent_dir) {
  int64_t best_step = -1;
  fs::path best;
  for (const auto& entry : fs::directory_iterator(agent_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("step_", 0) != 0 || entry.path().extension() != ".ckpt") continue;
    const int64_t step = std::stoll(name.substr(5, name.size() - 5 - 5));
    if (step > best_step) {
      best_step = step;
      best = entry.path();
    }
  }
  if (best_step < 0) {
    throw MissingArtifactError("no step_*.ckpt in " + agent_dir.string());
  }
  return best.string();
}

// Resolves --opponents: "scripted" gives one specialist per kind (repeated
// until every non-agent seat can be filled); anything else is a run or agent
// directory of checkpoints.
std::vector<std::unique_ptr<Policy>> BuildOpponents(const std::string& spec, int num_players,
                                                    int collect_target) {
  std::vector<std::unique_ptr<Policy>> opponents;
  if (spec == "scripted") {
    const int needed = std::max(kNumResourceKinds, num_players - 1);
    for (int i = 0; i < needed; ++i) {
      opponents.push_back(std::make_unique<ScriptedBot>(
          static_cast<ResourceKind>(i % kNumResourceKinds), collect_target));
    }
    return opponents;
  }
  if (!fs::is_directory(spec)) {
    throw MissingArtifactError("opponent directory not found: " + spec);
  }
  std::vector<fs::path> agent_dirs;
  if (fs::exists(fs::path(spec) / "metadata.json")) {
    agent_dirs.push_back(spec);
  } else {
    for (const auto& entry : fs::directory_iterator(spec)) {
      if (entry.is_directory() && fs::exists(entry.path() / "metadata.json")) {
        agent_dirs.push_back(entry.path());
      }
    }
    std::sort(agent_dirs.begin(), agent_dirs.end());
  }
  if (agent_dirs.empty()) {
    throw MissingArtifactError("no agent directories under " + spec);
  }
  size_t index = 0;
  while (static_cast<int>(opponents.size()) < std::max<int>(1, num_players - 1) ||
         opponents.size() < agent_dirs.size()) {
    const fs::path& dir = agent_dirs[index % agent_dirs.size()];
    LoadedAgent loaded = LoadAgent(LatestCheckpointIn(dir));
    opponents.push_back(std::make_unique<NetworkPolicy>(
        loaded.id + "#" + std::to_string(index), loaded.variant, loaded.network, loaded.params));
    ++index;
  }
  return opponents;
}

int CmdTrain(const std::string& config_path, std::optional<uint64_t> seed,
             const std::string& out_dir, std::optional<int> threads,
             const std::string& variant_name, int repeats) {
  if (!fs::exists(config_path)) throw MissingArtifactError("config not found: " + config_path);
  TrainConfig config = LoadTrainConfig(config_path);
  if (seed) config.seed = *seed;
  if (threads) config.threads = *threads;
  if (!variant_name.empty()) config.variant = VariantFromName(variant_name);
  if (seed || !variant_name.empty()) {
    config.run_id.clear();  // rederive from the overridden values
    config.Finalize();
  }
  if (repeats < 1) throw std::invalid_argument("--repeats must be positive");

  nlohmann::json out;
  out["config_hash"] = TrainConfigHash(config);
  if (repeats > 1) {
    PopulationResult result = TrainPopulation(config, out_dir, config.num_agents, repeats);
    out["run_dirs"] = result.run_dirs;
    out["checkpoints"] = result.checkpoints;
  } else {
    TrainResult result = RunTraining(config, out_dir);
    out["run_dirs"] = {result.run_dir};
    out["checkpoints"] = result.checkpoints;
    out["total_updates"] = result.total_updates;
    out["total_episodes"] = result.total_episodes;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int CmdEval(const std::string& checkpoint, const std::string& opponents_spec, int episodes,
            uint64_t seed, const std::string& out_path, const std::string& preset_override,
            int collect_target, const std::string& record_path) {
  LoadedAgent loaded = LoadAgent(checkpoint);
  const GridConfig grid =
      ResolvePreset(preset_override.empty() ? loaded.preset_name : preset_override);
  NetworkPolicy agent(loaded.id, loaded.variant, loaded.network, loaded.params);

  std::vector<std::unique_ptr<Policy>> opponents =
      BuildOpponents(opponents_spec, grid.num_players, collect_target);
  std::vector<Policy*> opponent_ptrs;
  for (const auto& opponent : opponents) opponent_ptrs.push_back(opponent.get());

  HoldoutEvalResult result = EvaluateVsOpponents(grid, agent, opponent_ptrs, episodes, seed);

  const std::string config_hash = GridConfigHash(grid);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << "episode,seed,return,config_hash\n";
    for (size_t e = 0; e < result.per_episode_returns.size(); ++e) {
      out << e << "," << result.episode_seeds[e] << "," << result.per_episode_returns[e] << ","
          << config_hash << "\n";
    }
  }

  if (!record_path.empty()) {
    // One extra episode, recorded step by step for `opre replay`.
    ReplayHeader header;
    header.config = grid;
    header.seed = result.episode_seeds.front();
    std::vector<SeatSpec> seats(static_cast<size_t>(grid.num_players));
    agent.SetParams(loaded.params);
    seats[0].policy = &agent;
    for (int s = 1; s < grid.num_players; ++s) {
      seats[static_cast<size_t>(s)].policy = opponent_ptrs[static_cast<size_t>(s - 1)];
    }
    for (const SeatSpec& seat : seats) header.policy_ids.push_back(seat.policy->Id());
    ReplayWriter writer(record_path, header);
    PlayEpisode(grid, header.seed, seats, &writer);
  }

  nlohmann::json summary;
  summary["agent"] = loaded.id;
  summary["episodes"] = result.episodes;
  summary["mean_return"] = result.mean_return;
  summary["win_rate"] = result.win_rate;
  summary["mean_length"] = result.mean_length;
  summary["mean_pickups"] = result.mean_pickups;
  summary["pickup_fractions"] = result.pickup_fractions;
  summary["config_hash"] = config_hash;
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int CmdTournament(const std::vector<std::string>& checkpoints, bool scripted,
                  const std::string& preset_name, int episodes, uint64_t seed,
                  const std::string& out_prefix, int collect_target) {
  const GridConfig grid = ResolvePreset(preset_name);
  std::vector<PolicyFactory> factories;
  if (scripted) {
    for (int k = 0; k < kNumResourceKinds; ++k) {
      factories.push_back([k, collect_target] {
        return std::make_unique<ScriptedBot>(static_cast<ResourceKind>(k), collect_target);
      });
    }
  }
  int index = 0;
  for (const std::string& path : checkpoints) {
    LoadedAgent loaded = LoadAgent(path);
    const std::string id = loaded.id + "#" + std::to_string(index++);
    factories.push_back([loaded, id] {
      return std::make_unique<NetworkPolicy>(id, loaded.variant, loaded.network, loaded.params);
    });
  }
  if (factories.empty()) {
    throw std::invalid_argument("tournament needs --checkpoints and/or --scripted");
  }

  MetaGame meta = RoundRobin(grid, factories, episodes, seed);
  WriteMetaGameCsv(meta, out_prefix + ".csv");
  NashResult nash = SolveNash(meta.payoff);

  nlohmann::json out;
  out["policies"] = meta.ids;
  out["nash_weights"] = nash.weights;
  out["exploitability"] = nash.exploitability;
  out["effective_diversity"] = EffectiveDiversity(meta.payoff, nash.weights);
  out["raw_asymmetry"] = meta.raw_asymmetry;
  out["episodes_per_cell"] = meta.episodes_per_cell;
  out["config_hash"] = GridConfigHash(grid);
  {
    std::ofstream nash_out(out_prefix + "_nash.json");
    if (!nash_out) throw std::runtime_error("cannot write " + out_prefix + "_nash.json");
    nash_out << out.dump(2) << "\n";
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int CmdProbe(const std::string& checkpoint, int episodes, uint64_t seed,
             const std::string& out_path, const std::string& preset_override, int collect_target) {
  LoadedAgent loaded = LoadAgent(checkpoint);
  const GridConfig grid =
      ResolvePreset(preset_override.empty() ? loaded.preset_name : preset_override);
  OptionProbeReport report = RunOptionProbe(grid, loaded.network, loaded.variant, loaded.params,
                                            episodes, seed, collect_target);
  if (!out_path.empty()) WriteProbeCsv(report, out_path);

  nlohmann::json summary;
  summary["agent"] = loaded.id;
  summary["num_options"] = report.num_options;
  summary["episodes_per_cell"] = report.episodes_per_cell;
  summary["best_option_separation_p"] = BestOptionSeparationPValue(report);
  summary["config_hash"] = GridConfigHash(grid);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int CmdReplay(const std::string& path) {
  if (!fs::exists(path)) throw MissingArtifactError("replay not found: " + path);
  Replay replay = LoadReplay(path);
  GameState state = GameState::Reset(replay.header.config, replay.header.seed);

  std::cout << "episode: seed=" << replay.header.seed
            << " steps=" << replay.steps.size() << " players=";
  for (size_t i = 0; i < replay.header.policy_ids.size(); ++i) {
    std::cout << (i > 0 ? "," : "") << replay.header.policy_ids[i];
  }
  std::cout << "\n\nstep 0 (initial)\n" << RenderAscii(state);

  std::vector<double> returns(replay.header.policy_ids.size(), 0.0);
  for (size_t t = 0; t < replay.steps.size(); ++t) {
    const ReplayStep& step = replay.steps[t];
    StepOutcome outcome = state.Step(step.actions);
    if (outcome.events.size() != step.events.size()) {
      throw std::runtime_error("replay diverged from the recording at step " + std::to_string(t));
    }
    for (size_t i = 0; i < outcome.rewards.size(); ++i) returns[i] += outcome.rewards[i];

    std::cout << "\nstep " << t + 1 << "\n" << RenderAscii(state);
    for (size_t i = 0; i < step.option_weights.size(); ++i) {
      if (step.option_weights[i].empty()) continue;
      std::cout << "p(z) seat " << i << ":";
      for (double w : step.option_weights[i]) {
        std::cout << " " << std::fixed << std::setprecision(3) << w;
      }
      std::cout << "\n" << std::defaultfloat;
    }
    for (const Event& event : step.events) {
      if (const auto* c = std::get_if<ConfrontationEvent>(&event)) {
        std::cout << "confrontation: " << c->tagger << " tags " << c->tagged
                  << " reward " << c->reward << "\n";
      } else {
        const auto& p = std::get<PickupEvent>(event);
        std::cout << "pickup: player " << p.player << " " << ResourceName(p.kind) << "\n";
      }
    }
  }
  std::cout << "\nreturns:";
  for (double r : returns) std::cout << " " << r;
  std::cout << "\n";
  return 0;
}

int CmdPreset(const std::string& name, const std::string& out_path) {
  SavePreset(BuiltinPreset(name), out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"OPRE training, evaluation and analysis tool"};
  app.require_subcommand(1);

  std::string config_path, out = ".", variant, opponents = "scripted", preset, checkpoint;
  std::vector<std::string> checkpoints;
  std::string replay_file, preset_name = "rws", preset_out;
  uint64_t seed = 1;
  bool seed_set = false;
  int threads = 0;
  int episodes = 100;
  int repeats = 1;
  int collect_target = 5;
  bool scripted = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Random seed")->envname("OPRE_SEED");
    cmd->add_option("--out", out, "Output path or directory")->envname("OPRE_OUT");
  };

  CLI::App* train = app.add_subcommand("train", "Train per a JSON run config");
  train->add_option("--config", config_path, "Run config JSON")
      ->envname("OPRE_CONFIG")
      ->required();
  add_common(train);
  train->add_option("--threads", threads, "Actor thread count (0: use the config)")
      ->envname("OPRE_THREADS");
  train->add_option("--variant", variant, "Override the agent variant");
  train->add_option("--repeats", repeats, "Independent repeats (self-play populations)");
  train->callback([&] {
    seed_set = train->count("--seed") > 0 || std::getenv("OPRE_SEED") != nullptr;
  });

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint against opponents");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("--opponents", opponents, "'scripted' or a checkpoint directory");
  eval->add_option("--episodes", episodes, "Episode count")->envname("OPRE_EPISODES");
  eval->add_option("--preset", preset, "Grid preset name or file (default: from metadata)");
  eval->add_option("--collect-target", collect_target, "Scripted bot hunt threshold");
  std::string record_path;
  eval->add_option("--record", record_path, "Also record one episode as a replay file");
  add_common(eval);

  CLI::App* tournament = app.add_subcommand("tournament", "Round-robin meta-game and its Nash");
  tournament->add_option("--checkpoints", checkpoints, "Checkpoint files");
  tournament->add_flag("--scripted", scripted, "Include the three scripted specialists");
  tournament->add_option("--episodes", episodes, "Episodes per ordered pair")
      ->envname("OPRE_EPISODES");
  tournament->add_option("--preset", preset_name, "Grid preset name or file");
  tournament->add_option("--collect-target", collect_target, "Scripted bot hunt threshold");
  add_common(tournament);

  CLI::App* probe = app.add_subcommand("probe", "Forced-option behavioral probe");
  probe->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  probe->add_option("--episodes", episodes, "Episodes per option-opponent cell")
      ->envname("OPRE_EPISODES");
  probe->add_option("--preset", preset, "Grid preset name or file (default: from metadata)");
  probe->add_option("--collect-target", collect_target, "Scripted bot hunt threshold");
  add_common(probe);

  CLI::App* replay = app.add_subcommand("replay", "Re-simulate and print a recorded episode");
  replay->add_option("--file", replay_file, "Replay JSONL file")->required();

  CLI::App* preset_cmd = app.add_subcommand("preset", "Export a builtin grid preset as JSON");
  preset_cmd->add_option("--name", preset_name, "Builtin preset name")->required();
  preset_cmd->add_option("--out", preset_out, "Output JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    if (app.got_subcommand(train)) {
      return CmdTrain(config_path, seed_set ? std::optional<uint64_t>(seed) : std::nullopt,
                      out == "." ? "runs" : out,
                      threads > 0 ? std::optional<int>(threads) : std::nullopt, variant, repeats);
    }
    if (app.got_subcommand(eval)) {
      return CmdEval(checkpoint, opponents, episodes, seed,
                     eval->count("--out") > 0 ? out : std::string(), preset, collect_target,
                     record_path);
    }
    if (app.got_subcommand(tournament)) {
      return CmdTournament(checkpoints, scripted, preset_name, episodes, seed,
                           tournament->count("--out") > 0 ? out : "tournament", collect_target);
    }
    if (app.got_subcommand(probe)) {
      return CmdProbe(checkpoint, episodes, seed,
                      probe->count("--out") > 0 ? out : std::string(), preset, collect_target);
    }
    if (app.got_subcommand(replay)) return CmdReplay(replay_file);
    if (app.got_subcommand(preset_cmd)) return CmdPreset(preset_name, preset_out);
    return kExitConfigError;
  } catch (const MissingArtifactError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissingArtifact;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntimeFailure;
  }
}

}  // namespace
}  // namespace opre

int main(int argc, char** argv) { return opre::Main(argc, argv); }

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

#ifndef OPRE_HARNESS_TRAIN_HPP_
#define OPRE_HARNESS_TRAIN_HPP_

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "opre/eval/policy.hpp"
#include "opre/eval/scripted.hpp"
#include "opre/harness/config.hpp"
#include "opre/harness/episode.hpp"
#include "opre/harness/queue.hpp"
#include "opre/learn/loss.hpp"
#include "opre/learn/optimizer.hpp"
#include "opre/nn/checkpoint.hpp"

namespace opre {

// Latest published parameter snapshot for one agent. Snapshots are immutable;
// publication swaps the pointer under a short lock.
class SnapshotSlot {
 public:
  void Publish(ParamSnapshot snapshot) {
    std::scoped_lock lock(mutex_);
    snapshot_ = std::move(snapshot);
  }
  ParamSnapshot Get() const {
    std::scoped_lock lock(mutex_);
    return snapshot_;
  }

 private:
  mutable std::mutex mutex_;
  ParamSnapshot snapshot_;
};

inline std::string Iso8601Now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buffer[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buffer;
}

// Writes `text` atomically (temp file + rename) so readers never see a
// partial manifest.
inline void WriteFileAtomic(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

// Learner-side state of one agent: master parameters, optimizer, its intake
// queue, and the snapshot actors read from.
struct AgentRuntime {
  std::string id;
  AgentVariant variant = AgentVariant::kOpre;
  PseudorewardSpec pseudoreward;
  uint64_t init_seed = 0;

  std::unique_ptr<Network<float>> net;
  ParameterStore<float> params;
  std::unique_ptr<Adam<float>> adam;
  std::unique_ptr<TrajectoryQueue> queue;
  SnapshotSlot snapshot;

  std::vector<Trajectory> staging;  // dequeued slices awaiting a full batch
  std::atomic<int64_t> steps{0};
  int64_t updates = 0;
  int64_t stall_events = 0;
  std::ofstream metrics;

  bool Done(int64_t max_steps) const { return steps.load() >= max_steps; }
};

struct TrainResult {
  std::string run_dir;
  std::vector<std::string> agent_ids;
  std::vector<std::string> checkpoints;  // final checkpoint per agent
  int64_t total_updates = 0;
  int64_t total_episodes = 0;
};

// Actor-learner training per the run config: actor workers generate behavior
// trajectories into bounded queues, the learner thread consumes batches of
// B sequences per update and republishes parameters. With threads == 1 the
// whole schedule runs inline on the caller's thread and is deterministic.
class Trainer {
 public:
  // `progress` (optional) runs on the learner thread after an update for the
  // given agent; returning false stops training early.
  using ProgressCallback =
      std::function<bool(const std::string& agent_id, ParamSnapshot snapshot, int64_t steps)>;

  Trainer(TrainConfig config, std::string out_dir)
      : config_(std::move(config)), out_dir_(std::move(out_dir)) {
    config_.Finalize();
    if (config_.threads == 1 && config_.queue_overflow == QueueOverflow::kBlock) {
      // Inline mode has no consumer running while an episode is in flight, so
      // the queue must hold a whole episode's worth of slices.
      const int per_seat = (config_.preset.episode_limit + config_.unroll_length - 1) /
                               config_.unroll_length + 1;
      if (config_.queue_capacity < config_.preset.num_players * per_seat) {
        throw std::invalid_argument("Trainer: queue too small for synchronous mode");
      }
    }
    BuildAgents();
  }

  void SetProgressCallback(ProgressCallback callback, int64_t every_updates) {
    progress_ = std::move(callback);
    progress_every_updates_ = every_updates > 0 ? every_updates : 1;
  }

  const std::vector<std::unique_ptr<AgentRuntime>>& agents() const { return agents_; }
  const std::string& run_dir() const { return run_dir_; }

  TrainResult Run() {
    PrepareRunDir();
    TrainResult result;
    result.run_dir = run_dir_;
    for (const auto& agent : agents_) result.agent_ids.push_back(agent->id);

    if (config_.threads == 1) {
      RunSynchronous();
    } else {
      RunThreaded();
    }

    for (const auto& agent : agents_) {
      result.checkpoints.push_back(WriteCheckpoint(*agent));
      result.total_updates += agent->updates;
    }
    result.total_episodes = episodes_played_.load();
    FinishManifest(result);
    return result;
  }

 private:
  // One actor worker's private view: its own policy instances (recurrent
  // state is per-actor), scripted bots, and generator.
  struct ActorContext {
    Rng rng{0};
    std::vector<std::unique_ptr<NetworkPolicy>> policies;  // one per agent
    std::vector<int64_t> slices_since_sync;
    int64_t episodes = 0;
  };

  void BuildAgents() {
    std::vector<std::pair<std::string, PseudorewardSpec>> specs;
    switch (config_.mode) {
      case TrainMode::kFixedOpponents:
        specs.push_back({"agent0", {}});
        break;
      case TrainMode::kSelfPlayPool:
        for (int i = 0; i < config_.num_agents; ++i) {
          specs.push_back({"agent" + std::to_string(i), {}});
        }
        break;
      case TrainMode::kHoldoutPopulation: {
        for (int k = 0; k < kNumResourceKinds; ++k) {
          for (int i = 0; i < config_.holdout_per_kind; ++i) {
            PseudorewardSpec pseudo;
            pseudo.enabled = true;
            pseudo.target = static_cast<ResourceKind>(k);
            specs.push_back(
                {std::string("holdout_") + ResourceName(pseudo.target) + "_" + std::to_string(i),
                 pseudo});
          }
        }
        for (int i = 0; i < config_.holdout_plain; ++i) {
          specs.push_back({"holdout_plain_" + std::to_string(i), {}});
        }
        break;
      }
    }
    const AgentVariant variant =
        config_.mode == TrainMode::kHoldoutPopulation ? AgentVariant::kBaseline : config_.variant;

    uint64_t agent_index = 0;
    for (auto& [id, pseudo] : specs) {
      auto agent = std::make_unique<AgentRuntime>();
      agent->id = id;
      agent->variant = variant;
      agent->pseudoreward = pseudo;
      agent->init_seed = config_.seed * 0x100 + agent_index;
      agent->net = std::make_unique<Network<float>>(config_.network, variant);
      Rng init_rng(agent->init_seed);
      agent->params = agent->net->InitParams(init_rng);
      agent->adam = std::make_unique<Adam<float>>(config_.adam);
      agent->queue = std::make_unique<TrajectoryQueue>(
          static_cast<size_t>(config_.queue_capacity), config_.queue_overflow);
      agent->snapshot.Publish(std::make_shared<const ParameterStore<float>>(agent->params));
      agents_.push_back(std::move(agent));
      ++agent_index;
    }
  }

  void PrepareRunDir() {
    namespace fs = std::filesystem;
    run_dir_ = (fs::path(out_dir_) / config_.run_id).string();
    fs::create_directories(run_dir_);
    for (const auto& agent : agents_) {
      fs::create_directories(fs::path(run_dir_) / agent->id);
      WriteAgentMetadata(*agent);
      if (config_.write_metrics) {
        agent->metrics.open(fs::path(run_dir_) / agent->id / "metrics.jsonl", std::ios::trunc);
      }
    }
    if (config_.write_metrics) {
      episode_log_.open(fs::path(run_dir_) / "episodes.jsonl", std::ios::trunc);
    }

    nlohmann::json manifest;
    manifest["run_id"] = config_.run_id;
    manifest["config_hash"] = TrainConfigHash(config_);
    manifest["preset"] = config_.preset_name;
    manifest["mode"] = TrainModeName(config_.mode);
    manifest["variant"] = VariantName(config_.variant);
    manifest["seed"] = config_.seed;
    manifest["agent_seeds"] = nlohmann::json::array();
    for (const auto& agent : agents_) manifest["agent_seeds"].push_back(agent->init_seed);
    manifest["started"] = Iso8601Now();
    manifest["outputs"] = nlohmann::json::array();
    for (const auto& agent : agents_) {
      manifest["outputs"].push_back(agent->id + "/metrics.jsonl");
    }
    manifest_ = manifest;
    WriteFileAtomic(std::filesystem::path(run_dir_) / "manifest.json", manifest.dump(2) + "\n");
  }

  void WriteAgentMetadata(const AgentRuntime& agent) {
    nlohmann::json meta;
    meta["agent_id"] = agent.id;
    meta["variant"] = VariantName(agent.variant);
    meta["seed"] = agent.init_seed;
    meta["config_hash"] = TrainConfigHash(config_);
    meta["preset"] = config_.preset_name;
    meta["arch_hash"] = agent.params.ArchHash();
    const OpreConfig& n = config_.network;
    meta["network"] = {{"num_options", n.num_options},     {"conv_channels", n.conv_channels},
                       {"conv_width", n.conv_width},       {"torso_hidden1", n.torso_hidden1},
                       {"torso_hidden2", n.torso_hidden2}, {"lstm_hidden", n.lstm_hidden},
                       {"option_hidden", n.option_hidden}, {"q_embed", n.q_embed},
                       {"q_hidden", n.q_hidden},           {"num_opponents", n.num_opponents}};
    if (agent.pseudoreward.enabled) {
      meta["pseudoreward_target"] = ResourceName(agent.pseudoreward.target);
    }
    WriteFileAtomic(std::filesystem::path(run_dir_) / agent.id / "metadata.json",
                    meta.dump(2) + "\n");
  }

  void FinishManifest(const TrainResult& result) {
    manifest_["finished"] = Iso8601Now();
    manifest_["checkpoints"] = result.checkpoints;
    manifest_["total_updates"] = result.total_updates;
    manifest_["total_episodes"] = result.total_episodes;
    WriteFileAtomic(std::filesystem::path(run_dir_) / "manifest.json", manifest_.dump(2) + "\n");
  }

  ActorContext MakeActorContext(uint64_t actor_seed) {
    ActorContext ctx;
    ctx.rng = Rng(actor_seed);
    for (const auto& agent : agents_) {
      ctx.policies.push_back(std::make_unique<NetworkPolicy>(agent->id, agent->variant,
                                                             config_.network,
                                                             agent->snapshot.Get()));
      ctx.slices_since_sync.push_back(0);
    }
    return ctx;
  }

  // Seat assignment for one match: agent index per seat, or -1 - kind for a
  // scripted opponent of that kind.
  std::vector<int> SampleMatch(Rng& rng) {
    const int seats = config_.preset.num_players;
    std::vector<int> assignment(static_cast<size_t>(seats));
    if (config_.mode == TrainMode::kFixedOpponents) {
      const int learner_seat = rng.UniformIndex(seats);
      for (int s = 0; s < seats; ++s) {
        if (s == learner_seat) {
          assignment[static_cast<size_t>(s)] = 0;
        } else {
          const ResourceKind kind =
              config_.opponents[static_cast<size_t>(rng.UniformIndex(
                  static_cast<int>(config_.opponents.size())))];
          assignment[static_cast<size_t>(s)] = -1 - static_cast<int>(kind);
        }
      }
      return assignment;
    }
    // Population play: uniform among the pool, without replacement when the
    // pool is large enough.
    const int pool = static_cast<int>(agents_.size());
    if (pool >= seats) {
      const std::vector<int> ids = rng.Permutation(pool);
      for (int s = 0; s < seats; ++s) assignment[static_cast<size_t>(s)] = ids[static_cast<size_t>(s)];
    } else {
      for (int s = 0; s < seats; ++s) assignment[static_cast<size_t>(s)] = rng.UniformIndex(pool);
    }
    return assignment;
  }

  // Plays one episode, feeding trajectory slices into agent queues. Returns
  // false once the run is shutting down.
  bool PlayTrainingEpisode(ActorContext& ctx) {
    const std::vector<int> assignment = SampleMatch(ctx.rng);
    const uint64_t episode_seed = ctx.rng.NextU64();
    bool push_failed = false;

    std::vector<SeatSpec> seats(assignment.size());
    std::vector<std::unique_ptr<ScriptedBot>> bots;
    for (size_t s = 0; s < assignment.size(); ++s) {
      const int a = assignment[s];
      if (a < 0) {
        bots.push_back(std::make_unique<ScriptedBot>(static_cast<ResourceKind>(-1 - a),
                                                     config_.opponent_collect_target));
        seats[s].policy = bots.back().get();
        continue;
      }
      AgentRuntime& agent = *agents_[static_cast<size_t>(a)];
      NetworkPolicy& policy = *ctx.policies[static_cast<size_t>(a)];
      seats[s].policy = &policy;
      seats[s].actor = &policy;
      seats[s].unroll_length = config_.unroll_length;
      seats[s].record_concealed = UsesConcealedInfo(agent.variant);
      seats[s].pseudoreward = agent.pseudoreward;
      seats[s].sink = [this, &agent, &push_failed](Trajectory&& slice) {
        if (!agent.queue->Push(QueueItem{agent.id, std::move(slice)})) push_failed = true;
      };
      int64_t* counter = &ctx.slices_since_sync[static_cast<size_t>(a)];
      seats[s].on_slice_start = [this, &agent, counter](NetworkPolicy& p) {
        if (*counter % config_.sync_period == 0) p.SetParams(agent.snapshot.Get());
        ++*counter;
      };
    }

    EpisodeStats stats = PlayEpisode(config_.preset, episode_seed, seats);
    ++ctx.episodes;
    const int64_t episode_index = episodes_played_.fetch_add(1);

    if (config_.write_metrics) {
      nlohmann::json row;
      row["episode"] = episode_index;
      row["length"] = stats.length;
      row["seats"] = nlohmann::json::array();
      for (size_t s = 0; s < assignment.size(); ++s) {
        row["seats"].push_back(seats[s].policy->Id());
      }
      row["returns"] = stats.returns;
      row["training_returns"] = stats.training_returns;
      std::scoped_lock lock(episode_log_mutex_);
      episode_log_ << row.dump() << "\n";
    }
    return !push_failed && !stop_.load();
  }

  void Update(AgentRuntime& agent, TrajectoryBatch batch) {
    LossResult<float> loss = ComputeLoss(*agent.net, batch, agent.params, config_.coefficients);
    agent.adam->Apply(agent.params, loss.gradients);
    agent.snapshot.Publish(std::make_shared<const ParameterStore<float>>(agent.params));
    // Alg. 2 step accounting: every update consumes exactly B*T steps.
    agent.steps.fetch_add(static_cast<int64_t>(config_.batch_size) * config_.unroll_length);
    ++agent.updates;

    if (agent.metrics.is_open()) {
      const LossBreakdown& b = loss.breakdown;
      nlohmann::json row;
      row["step"] = agent.steps.load();
      row["update"] = agent.updates;
      row["policy_loss"] = b.policy_loss;
      row["value_loss"] = b.value_loss;
      row["kl_qp"] = b.kl_qp;
      row["reg_Ht"] = b.reg_Ht;
      row["reg_Hb"] = b.reg_Hb;
      row["reg_Hpi"] = b.reg_Hpi;
      row["aux_loss"] = b.aux_loss;
      row["total"] = b.total;
      row["grad_norm"] = agent.adam->last_grad_norm();
      row["param_version"] = agent.params.version();
      agent.metrics << row.dump() << "\n";
    }
    if (config_.checkpoint_every_updates > 0 &&
        agent.updates % config_.checkpoint_every_updates == 0) {
      WriteCheckpoint(agent);
    }
    if (progress_ && agent.updates % progress_every_updates_ == 0) {
      if (!progress_(agent.id, agent.snapshot.Get(), agent.steps.load())) stop_.store(true);
    }
  }

  std::string WriteCheckpoint(AgentRuntime& agent) {
    const std::filesystem::path path = std::filesystem::path(run_dir_) / agent.id /
                                       ("step_" + std::to_string(agent.steps.load()) + ".ckpt");
    OptimizerSnapshot snap{agent.adam->step(), agent.adam->first_moments(),
                           agent.adam->second_moments()};
    SaveCheckpoint(path.string(), agent.params, &snap);
    return path.string();
  }

  // Drains queues into staging buffers and runs every update that has a full
  // batch available. Returns the number of updates performed.
  int DrainAndUpdate() {
    int performed = 0;
    for (auto& agent : agents_) {
      while (auto item = agent->queue->TryPop()) {
        agent->staging.push_back(std::move(item->trajectory));
      }
      while (!agent->Done(config_.max_steps) &&
             agent->staging.size() >= static_cast<size_t>(config_.batch_size)) {
        TrajectoryBatch batch;
        batch.sequences.assign(
            std::make_move_iterator(agent->staging.begin()),
            std::make_move_iterator(agent->staging.begin() + config_.batch_size));
        agent->staging.erase(agent->staging.begin(), agent->staging.begin() + config_.batch_size);
        Update(*agent, std::move(batch));
        ++performed;
        if (stop_.load()) return performed;
      }
    }
    return performed;
  }

  bool AllDone() const {
    for (const auto& agent : agents_) {
      if (!agent->Done(config_.max_steps)) return false;
    }
    return true;
  }

  void RunSynchronous() {
    ActorContext ctx = MakeActorContext(config_.seed ^ 0xac70f5ull);
    while (!AllDone() && !stop_.load()) {
      if (!PlayTrainingEpisode(ctx)) break;
      DrainAndUpdate();
    }
  }

  void RunThreaded() {
    std::vector<std::thread> workers;
    for (int i = 0; i < config_.threads; ++i) {
      workers.emplace_back([this, i] {
        ActorContext ctx = MakeActorContext(config_.seed ^ (0xac70f5ull + 0x1000ull * i));
        while (!stop_.load() && !AllDone()) {
          if (!PlayTrainingEpisode(ctx)) break;
        }
      });
    }
    using namespace std::chrono_literals;
    auto last_progress = std::chrono::steady_clock::now();
    while (!AllDone() && !stop_.load()) {
      if (DrainAndUpdate() > 0) {
        last_progress = std::chrono::steady_clock::now();
      } else {
        std::this_thread::sleep_for(1ms);
        if (std::chrono::steady_clock::now() - last_progress > 60s) {
          // Starvation: actors have produced nothing for a while.
          for (auto& agent : agents_) ++agent->stall_events;
          last_progress = std::chrono::steady_clock::now();
        }
      }
    }
    stop_.store(true);
    for (auto& agent : agents_) agent->queue->Close();
    for (auto& worker : workers) worker.join();
  }

  TrainConfig config_;
  std::string out_dir_;
  std::string run_dir_;
  std::vector<std::unique_ptr<AgentRuntime>> agents_;
  std::atomic<bool> stop_{false};
  std::atomic<int64_t> episodes_played_{0};
  std::ofstream episode_log_;
  std::mutex episode_log_mutex_;
  nlohmann::json manifest_;
  ProgressCallback progress_;
  int64_t progress_every_updates_ = 1;
};

inline TrainResult RunTraining(const TrainConfig& config, const std::string& out_dir) {
  Trainer trainer(config, out_dir);
  return trainer.Run();
}

struct PopulationResult {
  std::vector<std::string> checkpoints;
  std::vector<std::string> run_dirs;
};

// Repeated simultaneous self-play: `repeats` independent pools of `num_seeds`
// same-variant agents. Defaults give 30 checkpoints per variant.
inline PopulationResult TrainPopulation(TrainConfig config, const std::string& out_dir,
                                        int num_seeds = 6, int repeats = 5) {
  if (num_seeds <= 0 || repeats <= 0) {
    throw std::invalid_argument("TrainPopulation: num_seeds and repeats must be positive");
  }
  PopulationResult result;
  config.mode = TrainMode::kSelfPlayPool;
  config.num_agents = num_seeds;
  const uint64_t base_seed = config.seed;
  const std::string base_run_id = config.run_id;
  for (int r = 0; r < repeats; ++r) {
    TrainConfig repeat_config = config;
    repeat_config.seed = base_seed + static_cast<uint64_t>(r);
    repeat_config.run_id.clear();
    repeat_config.Finalize();
    if (!base_run_id.empty()) repeat_config.run_id = base_run_id + "_rep" + std::to_string(r);
    else repeat_config.run_id += "_rep" + std::to_string(r);
    TrainResult run = RunTraining(repeat_config, out_dir);
    result.run_dirs.push_back(run.run_dir);
    for (const std::string& path : run.checkpoints) result.checkpoints.push_back(path);
  }
  return result;
}

// The pseudoreward-shaped hold-out population: per kind `holdout_per_kind`
// incentivized agents plus `holdout_plain` unshaped ones, trained together in
// population play. Defaults give the 14-agent set.
inline TrainResult TrainHoldoutPopulation(TrainConfig config, const std::string& out_dir) {
  config.mode = TrainMode::kHoldoutPopulation;
  config.run_id.clear();
  config.Finalize();
  return RunTraining(config, out_dir);
}

}  // namespace opre

#endif  // OPRE_HARNESS_TRAIN_HPP_

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

#include <catch_amalgamated.hpp>

#include "opre/eval/scripted.hpp"
#include "opre/game/presets.hpp"
#include "opre/harness/episode.hpp"

namespace opre {
namespace {

EpisodeStats PlayPair(const GridConfig& config, Policy& a, Policy& b, uint64_t seed) {
  std::vector<SeatSpec> seats(2);
  seats[0].policy = &a;
  seats[1].policy = &b;
  return PlayEpisode(config, seed, seats);
}

TEST_CASE("a specialist never picks up other kinds") {
  const GridConfig config = RwsSelfplay7Preset();
  ScriptedBot rock_bot(ResourceKind::kRock);
  RandomPolicy random;
  int rock_pickups = 0;
  for (uint64_t seed = 0; seed < 60; ++seed) {
    EpisodeStats stats = PlayPair(config, rock_bot, random, seed);
    CHECK(stats.pickups[0][static_cast<int>(ResourceKind::kPaper)] == 0);
    CHECK(stats.pickups[0][static_cast<int>(ResourceKind::kScissors)] == 0);
    rock_pickups += stats.pickups[0][static_cast<int>(ResourceKind::kRock)];
  }
  CHECK(rock_pickups > 60);  // it actually finds its resource, ~>1 per episode
}

TEST_CASE("counter-specialist wins on average") {
  const GridConfig config = RwsSelfplay7Preset();
  double paper_total = 0.0;
  int confrontations = 0;
  for (uint64_t seed = 0; seed < 150; ++seed) {
    ScriptedBot rock_bot(ResourceKind::kRock);
    ScriptedBot paper_bot(ResourceKind::kPaper);
    EpisodeStats stats = PlayPair(config, rock_bot, paper_bot, 1000 + seed);
    paper_total += stats.returns[1];
    confrontations += stats.confrontations[1];
  }
  CHECK(confrontations > 75);  // the hunt phase finds the opponent
  CHECK(paper_total / 150.0 > 20.0);
}

TEST_CASE("mirror matchup is balanced") {
  const GridConfig config = RwsSelfplay7Preset();
  double total = 0.0;
  for (uint64_t seed = 0; seed < 300; ++seed) {
    ScriptedBot a(ResourceKind::kRock);
    ScriptedBot b(ResourceKind::kRock);
    EpisodeStats stats = PlayPair(config, a, b, 5000 + seed);
    total += stats.returns[0];
  }
  CHECK(std::abs(total / 300.0) < 10.0);
}

TEST_CASE("episodes are deterministic given the seed") {
  const GridConfig config = RwsExploit7Preset();
  auto run = [&](uint64_t seed) {
    ScriptedBot rock_bot(ResourceKind::kRock, 8);
    RandomPolicy random;
    EpisodeStats stats = PlayPair(config, rock_bot, random, seed);
    return std::make_tuple(stats.length, stats.returns[0], stats.pickups[0], stats.pickups[1]);
  };
  for (uint64_t seed = 0; seed < 10; ++seed) CHECK(run(seed) == run(seed));
}

TEST_CASE("collect target controls when the hunt starts") {
  const GridConfig config = RwsSelfplay7Preset();
  // A low target sends the bot hunting early; a huge target keeps it
  // collecting until the grid is exhausted, so it picks up far more and its
  // episodes run longer. Either way it eventually hunts, so both tag.
  int hunt_tags = 0;
  int collect_tags = 0;
  int hunt_rocks = 0;
  int collect_rocks = 0;
  int hunt_length = 0;
  int collect_length = 0;
  for (uint64_t seed = 0; seed < 80; ++seed) {
    {
      ScriptedBot hunter(ResourceKind::kRock, 2);
      RandomPolicy random;
      EpisodeStats stats = PlayPair(config, hunter, random, 900 + seed);
      hunt_tags += stats.confrontations[0];
      hunt_rocks += stats.pickups[0][static_cast<int>(ResourceKind::kRock)];
      hunt_length += stats.length;
    }
    {
      ScriptedBot collector(ResourceKind::kRock, 1000);
      RandomPolicy random;
      EpisodeStats stats = PlayPair(config, collector, random, 900 + seed);
      collect_tags += stats.confrontations[0];
      collect_rocks += stats.pickups[0][static_cast<int>(ResourceKind::kRock)];
      collect_length += stats.length;
    }
  }
  CHECK(collect_rocks > hunt_rocks);
  CHECK(collect_length > hunt_length);
  CHECK(hunt_tags > 40);
  CHECK(collect_tags > 40);
}

}  // namespace
}  // namespace opre

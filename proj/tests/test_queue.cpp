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

#include <atomic>
#include <thread>
#include <vector>

#include <catch_amalgamated.hpp>

#include "opre/harness/queue.hpp"

namespace opre {
namespace {

QueueItem Item(uint64_t version) {
  QueueItem item;
  item.agent_id = "a";
  item.trajectory.behavior_version = version;
  return item;
}

TEST_CASE("queue is FIFO and bounded") {
  TrajectoryQueue queue(3);
  CHECK(queue.capacity() == 3);
  for (uint64_t v = 0; v < 3; ++v) REQUIRE(queue.Push(Item(v)));
  CHECK(queue.size() == 3);
  for (uint64_t v = 0; v < 3; ++v) {
    auto item = queue.TryPop();
    REQUIRE(item.has_value());
    CHECK(item->trajectory.behavior_version == v);
  }
  CHECK(!queue.TryPop().has_value());
}

TEST_CASE("zero capacity is rejected") {
  CHECK_THROWS_AS(TrajectoryQueue(0), std::invalid_argument);
}

TEST_CASE("drop-oldest keeps the newest items") {
  TrajectoryQueue queue(4, QueueOverflow::kDropOldest);
  for (uint64_t v = 0; v < 10; ++v) REQUIRE(queue.Push(Item(v)));
  CHECK(queue.size() == 4);
  CHECK(queue.dropped() == 6);
  for (uint64_t v = 6; v < 10; ++v) {
    auto item = queue.TryPop();
    REQUIRE(item.has_value());
    CHECK(item->trajectory.behavior_version == v);
  }
}

TEST_CASE("blocking producer resumes when the consumer makes room") {
  TrajectoryQueue queue(1);
  REQUIRE(queue.Push(Item(0)));
  std::atomic<bool> pushed{false};
  std::thread producer([&] {
    queue.Push(Item(1));
    pushed.store(true);
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  CHECK(!pushed.load());
  CHECK(queue.Pop().has_value());
  producer.join();
  CHECK(pushed.load());
  CHECK(queue.size() == 1);
}

TEST_CASE("close wakes producers and consumers and drains leftovers") {
  TrajectoryQueue queue(1);
  REQUIRE(queue.Push(Item(7)));
  std::thread producer([&] { CHECK(!queue.Push(Item(8))); });
  std::thread closer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    queue.Close();
  });
  producer.join();
  closer.join();
  CHECK(queue.closed());
  CHECK(!queue.Push(Item(9)));
  auto leftover = queue.Pop();
  REQUIRE(leftover.has_value());
  CHECK(leftover->trajectory.behavior_version == 7);
  CHECK(!queue.Pop().has_value());  // closed and drained: no blocking
}

TEST_CASE("many producers, one consumer, nothing lost") {
  TrajectoryQueue queue(8);
  constexpr int kProducers = 4;
  constexpr int kPerProducer = 200;
  std::vector<std::thread> producers;
  for (int p = 0; p < kProducers; ++p) {
    producers.emplace_back([&queue, p] {
      for (int i = 0; i < kPerProducer; ++i) {
        queue.Push(Item(static_cast<uint64_t>(p * kPerProducer + i)));
      }
    });
  }
  std::vector<int> seen(kProducers * kPerProducer, 0);
  for (int i = 0; i < kProducers * kPerProducer; ++i) {
    auto item = queue.Pop();
    REQUIRE(item.has_value());
    ++seen[static_cast<size_t>(item->trajectory.behavior_version)];
  }
  for (auto& producer : producers) producer.join();
  for (int count : seen) CHECK(count == 1);
}

}  // namespace
}  // namespace opre

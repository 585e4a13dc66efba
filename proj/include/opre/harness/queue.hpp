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

#ifndef OPRE_HARNESS_QUEUE_HPP_
#define OPRE_HARNESS_QUEUE_HPP_

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "opre/learn/trajectory.hpp"

namespace opre {

enum class QueueOverflow {
  kBlock,      // producers wait for space
  kDropOldest  // evict the oldest item to make room
};

struct QueueItem {
  std::string agent_id;
  Trajectory trajectory;  // carries the producing parameter version
};

// Bounded multi-producer single-consumer buffer of trajectory slices. Close()
// wakes everyone; pushes after close are refused and pops drain what is left.
class TrajectoryQueue {
 public:
  explicit TrajectoryQueue(size_t capacity, QueueOverflow overflow = QueueOverflow::kBlock)
      : capacity_(capacity), overflow_(overflow) {
    if (capacity_ == 0) throw std::invalid_argument("TrajectoryQueue: capacity must be positive");
  }

  // Returns false when the queue is closed.
  bool Push(QueueItem item) {
    std::unique_lock lock(mutex_);
    if (overflow_ == QueueOverflow::kBlock) {
      not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
      if (closed_) return false;
    } else {
      if (closed_) return false;
      if (items_.size() >= capacity_) {
        items_.pop_front();
        ++dropped_;
      }
    }
    items_.push_back(std::move(item));
    lock.unlock();
    not_empty_.notify_one();
    return true;
  }

  // Blocks until an item is available; nullopt once closed and drained.
  std::optional<QueueItem> Pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    QueueItem item = std::move(items_.front());
    items_.pop_front();
    lock.unlock();
    not_full_.notify_one();
    return item;
  }

  std::optional<QueueItem> TryPop() {
    std::unique_lock lock(mutex_);
    if (items_.empty()) return std::nullopt;
    QueueItem item = std::move(items_.front());
    items_.pop_front();
    lock.unlock();
    not_full_.notify_one();
    return item;
  }

  void Close() {
    {
      std::scoped_lock lock(mutex_);
      closed_ = true;
    }
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  bool closed() const {
    std::scoped_lock lock(mutex_);
    return closed_;
  }
  size_t size() const {
    std::scoped_lock lock(mutex_);
    return items_.size();
  }
  size_t capacity() const { return capacity_; }
  uint64_t dropped() const {
    std::scoped_lock lock(mutex_);
    return dropped_;
  }

 private:
  const size_t capacity_;
  const QueueOverflow overflow_;
  mutable std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<QueueItem> items_;
  bool closed_ = false;
  uint64_t dropped_ = 0;
};

}  // namespace opre

#endif  // OPRE_HARNESS_QUEUE_HPP_

// Copyright 2026 The sbsr Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <set>
#include <stdexcept>

namespace sbsr::service {

// Raised when the queue is full or the deadline passes before the caller's turn.
class GateBusy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One holder at a time, FIFO, at most `depth` callers waiting.
class BackboneGate {
 public:
  BackboneGate(int depth, std::chrono::milliseconds deadline);

  // Runs `fn` while holding the gate; returns the time spent waiting.
  std::chrono::microseconds Run(const std::function<void()>& fn);

  int waiting() const;

 private:
  const int depth_;
  const std::chrono::milliseconds deadline_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t serving_ = 0;
  int waiting_ = 0;
  std::set<std::uint64_t> abandoned_;
};

}  // namespace sbsr::service

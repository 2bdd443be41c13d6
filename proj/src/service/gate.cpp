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

#include "sbsr/service/gate.hpp"

namespace sbsr::service {

BackboneGate::BackboneGate(int depth, std::chrono::milliseconds deadline) : depth_(depth), deadline_(deadline) {
  if (depth < 0) throw std::invalid_argument("gate depth must be non-negative");
}

std::chrono::microseconds BackboneGate::Run(const std::function<void()>& fn) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  std::unique_lock lock(mu_);
  const bool idle = serving_ == next_ticket_;
  if (!idle && waiting_ >= depth_) throw GateBusy("backbone queue is full");
  const std::uint64_t ticket = next_ticket_++;
  if (!idle) {
    ++waiting_;
    const bool turn = cv_.wait_until(lock, start + deadline_, [&] { return serving_ == ticket; });
    --waiting_;
    if (!turn) {
      // Abandon the ticket: whoever finishes ahead of it skips over it.
      abandoned_.insert(ticket);
      throw GateBusy("backbone busy beyond deadline");
    }
  }
  const auto waited = std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start);
  lock.unlock();

  auto release = [&] {
    std::lock_guard relock(mu_);
    ++serving_;
    while (abandoned_.erase(serving_) > 0) ++serving_;
    cv_.notify_all();
  };
  try {
    fn();
  } catch (...) {
    release();
    throw;
  }
  release();
  return waited;
}

int BackboneGate::waiting() const {
  std::lock_guard lock(mu_);
  return waiting_;
}

}  // namespace sbsr::service

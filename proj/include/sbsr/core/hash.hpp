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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace sbsr {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

// 64-bit FNV-1a. Stable across platforms and runs, unlike std::hash; every
// seeded quantity (epsilon seeds, mock weights, cache keys) derives from it.
constexpr std::uint64_t Fnv1a64(std::string_view data, std::uint64_t seed = kFnvOffsetBasis) {
  std::uint64_t h = seed;
  for (char c : data) {
    h ^= static_cast<std::uint8_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t Fnv1a64Bytes(std::span<const std::byte> data, std::uint64_t seed = kFnvOffsetBasis);

// Order-dependent mix of two hashes (splitmix64 finalizer over a xor-shifted combine).
std::uint64_t HashCombine(std::uint64_t a, std::uint64_t b);

std::string HexDigest(std::uint64_t h);

}  // namespace sbsr

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
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "sbsr/core/error.hpp"

namespace sbsr {

std::string ReadFile(const std::filesystem::path& path);

// Writes to a sibling temporary and renames, so readers never observe a torn file.
void WriteFileAtomic(const std::filesystem::path& path, const std::string& bytes);

template <typename T>
  requires std::is_trivially_copyable_v<T>
void WritePod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
  requires std::is_trivially_copyable_v<T>
T ReadPod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorCode::kParseError, "unexpected end of binary stream");
  return value;
}

void WriteString(std::ostream& out, const std::string& s);
std::string ReadString(std::istream& in, std::uint32_t max_length = 1u << 20);

}  // namespace sbsr

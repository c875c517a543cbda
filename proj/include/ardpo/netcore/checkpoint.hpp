/*
 * Copyright (c) 2026 The ardpo Authors
 *
 * Licensed under the Apache License, Version 2.0;
 * You may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an 'AS IS' BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "ardpo/netcore/adamw.hpp"
#include "ardpo/netcore/param_set.hpp"

namespace ardpo::netcore {

struct Checkpoint {
  ParamSet params;
  std::optional<AdamWState> optimizer;
  std::int64_t step = 0;
  std::string config_hash;
};

// Layout: "ARDPOCK1", u64 little-endian header length, JSON header, then the
// float64 arrays (little-endian) in header order. Round trips are bit-exact.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ardpo::netcore

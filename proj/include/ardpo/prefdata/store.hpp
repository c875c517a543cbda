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

#include <filesystem>
#include <string>
#include <vector>

#include "ardpo/prefdata/pairs.hpp"

namespace ardpo::prefdata {

struct StoreHeader {
  std::string reward;       // RewardSpec::describe()
  std::size_t candidates = 0;
  std::string model_hash;
  std::string config_hash;
};

struct PairStore {
  StoreHeader header;
  std::vector<PreferencePair> pairs;

  friend bool operator==(const PairStore& a, const PairStore& b);
};

// Header line (JSON) then one JSON record per pair; arrays and rewards are
// hex floats so the round trip is bit-exact.
void save_store(const std::filesystem::path& path, const PairStore& store);
// Validates count, provenance and r_w > r_l for every record; throws
// CorruptionError carrying the failing record index.
PairStore load_store(const std::filesystem::path& path);

PairStore store_roundtrip(const PairStore& store, const std::filesystem::path& path);

// Samples prompts in index order, mines best/worst pairs from K candidates,
// skips degenerate prompts, stops at cfg.pairs pairs. Prompt i draws from
// master.split(i), so the store depends only on the master seed.
PairStore mine_pairs(const ardm::ArdmModel& model, const rewards::RewardSpec& spec,
                     const MiningConfig& cfg, const schedule::SamplerConfig& sampler,
                     const Rng& master, const std::string& config_hash);

}  // namespace ardpo::prefdata

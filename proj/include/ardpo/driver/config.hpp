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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ardpo/align/trainer.hpp"
#include "ardpo/ardm/model.hpp"
#include "ardpo/prefdata/pairs.hpp"
#include "ardpo/rewards/rewards.hpp"
#include "ardpo/schedule/schedule.hpp"

namespace ardpo::driver {

struct PretrainSettings {
  std::size_t steps = 5000;
  std::size_t batch = 64;
  std::size_t length = 16;
  double lr = 1e-3;
};

struct EvalSettings {
  std::size_t prompts = 500;
  std::size_t length = 16;
  std::size_t kl_samples = 1;
};

struct RaftSettings {
  std::size_t iterations = 3;
  std::size_t candidates = 32;
  std::size_t prompts = 256;
  std::size_t sft_steps = 100;
  std::size_t batch = 32;
  double lr = 1e-4;
};

enum class Stage { Pretrain, GenPrefs, Dpo, Raft, Bok, Eval, Report };

std::string_view stage_name(Stage s) noexcept;
Stage parse_stage(std::string_view name);

// Every knob of an experiment. Text form: one "key = value" per line, '#'
// comments, and "extends = <preset or file>" to inherit from a parent.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::filesystem::path out = "runs/default";
  ardm::ArdmArch arch;
  double process_decay = 0.8;
  double process_noise = 1.0;
  std::string reward = "variance:0";
  schedule::SamplerConfig sampler;
  PretrainSettings pretrain;
  prefdata::MiningConfig mining;
  align::DpoConfig dpo;
  EvalSettings eval;
  RaftSettings raft;
  std::vector<std::size_t> bok = {16, 64};

  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  static std::vector<std::string> keys();

  // Canonical text (sorted keys); parse(to_text()) reproduces the config.
  std::string to_text() const;
  // Hash of the keys that influence the artifacts of a stage and of every
  // stage upstream of it. Independent of key order in the source text.
  std::string stage_hash(Stage stage) const;
  std::string hash() const;

  void validate() const;

  rewards::ArProcess process() const;
  rewards::RewardSpec reward_spec() const;
};

// Built-in presets: "base", "task-a" (variance reward, K = 32), "task-b"
// (oracle NLL reward, K = 16), "paper" (task-a with the published optimizer
// and 1024-pair batches) and "smoke" (task-a shrunk to run in seconds).
bool is_preset(std::string_view name);
std::vector<std::string> preset_names();

ExperimentConfig load_preset(std::string_view name);
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);
// Preset name or config file path.
ExperimentConfig resolve_config(const std::string& name_or_path);

}  // namespace ardpo::driver

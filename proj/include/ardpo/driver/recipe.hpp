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
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "ardpo/driver/config.hpp"

namespace ardpo::driver {

// Sub-streams of the master seed.
enum class Stream : std::uint64_t {
  ModelInit = 1,
  PretrainData = 2,
  PretrainLoss = 3,
  Mining = 4,
  Dpo = 5,
  Eval = 6,
  Raft = 7,
};

netcore::Rng stream_rng(const ExperimentConfig& cfg, Stream s);

// Artifact names inside a run directory.
namespace files {
inline constexpr const char* kConfig = "config.txt";
inline constexpr const char* kBase = "base.ckpt";
inline constexpr const char* kPretrainLog = "pretrain.csv";
inline constexpr const char* kPairs = "pairs.jsonl";
inline constexpr const char* kDpoDir = "dpo";
inline constexpr const char* kMetrics = "dpo/metrics.csv";
inline constexpr const char* kDpoSummary = "dpo/summary.json";
inline constexpr const char* kDpoSelected = "dpo/selected.ckpt";
inline constexpr const char* kRaftDir = "raft";
inline constexpr const char* kBok = "bok.csv";
inline constexpr const char* kEval = "eval.csv";
inline constexpr const char* kTable = "table.txt";
inline constexpr const char* kSummary = "summary.json";
}  // namespace files

std::filesystem::path raft_checkpoint(const std::filesystem::path& run, std::size_t iteration);
std::filesystem::path done_marker(const std::filesystem::path& run, Stage stage);

// True when the stage finished for this exact configuration.
bool stage_done(const ExperimentConfig& cfg, Stage stage);

struct PretrainProgress {
  std::size_t step = 0;
  double loss = 0.0;
};

// Trains a fresh model on sequences drawn from the configured process.
// Batch element i of step s is generated from the PretrainData stream
// split by (s, i); on_step sees the loss before each update.
ardm::ArdmModel pretrain_model(const ExperimentConfig& cfg,
                               const std::function<void(const PretrainProgress&)>& on_step = {});

struct RecipeOptions {
  std::optional<std::filesystem::path> model;      // base checkpoint instead of <out>/base.ckpt
  std::optional<std::filesystem::path> pairs;      // pair store read by the dpo stage
  std::optional<std::filesystem::path> pairs_out;  // pair store written by gen-prefs
  bool force = false;                              // rerun stages already done
};

// Runs one stage, writing its artifacts under cfg.out. Throws
// MissingArtifactError naming the stage to run first when an input is absent,
// and ConfigError when an input was produced under a different configuration.
void run_stage(const ExperimentConfig& cfg, Stage stage, std::ostream& log,
               const RecipeOptions& options = {});

// pretrain, gen-prefs, dpo, raft, bok, eval, report.
void run_all(const ExperimentConfig& cfg, std::ostream& log, const RecipeOptions& options = {});

// Loads a checkpoint and checks its stamp against the configuration.
ardm::ArdmModel load_model(const ExperimentConfig& cfg, const std::filesystem::path& path,
                           Stage producer);

}  // namespace ardpo::driver

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

#include <functional>
#include <limits>
#include <vector>

#include "ardpo/align/baselines.hpp"
#include "ardpo/align/dpo.hpp"
#include "ardpo/error.hpp"
#include "ardpo/prefdata/store.hpp"

namespace ardpo::align {

struct DpoConfig {
  double beta = 200.0;
  bool d_norm = true;
  std::size_t batch_pairs = 8;
  std::size_t accumulation = 8;
  netcore::AdamWHyper optimizer = netcore::adamw_preset("desk-dpo");
  std::size_t max_steps = 500;
  std::size_t eval_interval = 50;
  // A checkpoint qualifies for selection when its reward beats the base model
  // and its KL metric stays at or below this ceiling.
  double kl_ceiling = std::numeric_limits<double>::infinity();
  double grad_clip = 0.0;  // global L2 norm; 0 disables clipping

  std::size_t effective_batch() const noexcept { return batch_pairs * accumulation; }
  void validate() const;
};

struct EvalConfig {
  rewards::RewardSpec reward;
  SampleSpec sampling;
  std::size_t kl_samples_per_token = 1;
  Rng rng{0};
};

struct Evaluation {
  RewardStats reward;
  double kl = 0.0;
};

// Reward and KL metric of a policy on its own samples for the evaluation prompts.
Evaluation evaluate_policy(const ArdmModel& policy, const ArdmModel& ref, const EvalConfig& eval);

struct MetricsRecord {
  std::size_t step = 0;
  double reward = 0.0;
  double reward_std_error = 0.0;
  double kl = 0.0;
  double delta_plus = 0.0;
  double delta_minus = 0.0;
  double margin_accuracy = 0.0;
  double wall_clock = 0.0;  // seconds since training started
};

struct TrainCheckpoint {
  std::size_t step = 0;
  ParamSet params;
};

struct DpoResult {
  ArdmModel model;  // parameters after the last step
  std::vector<MetricsRecord> metrics;
  std::vector<TrainCheckpoint> checkpoints;  // one per evaluation
  std::size_t selected = 0;                  // index into checkpoints (early stopping)

  ArdmModel selected_model() const;
};

class TrainingAborted : public NumericError {
 public:
  TrainingAborted(const std::string& what, std::size_t last_good_step)
      : NumericError(what), last_good_step_(last_good_step) {}
  std::size_t last_good_step() const noexcept { return last_good_step_; }

 private:
  std::size_t last_good_step_;
};

using CheckpointSink = std::function<void(const TrainCheckpoint&, const MetricsRecord&)>;

// AdamW on pair gradients averaged over batch_pairs x accumulation pairs per
// step. Step s draws pair j from rng.split(s).split(j). Metrics are recorded
// at step 0 and every eval_interval steps; Δ± and margin accuracy average the
// pairs seen since the previous record (step 0 uses the first batch).
DpoResult dpo_train(const ArdmModel& initial, const ArdmModel& ref, const prefdata::PairStore& store,
                    const DpoConfig& cfg, const EvalConfig& eval, const Rng& rng,
                    const CheckpointSink& sink = {});

}  // namespace ardpo::align

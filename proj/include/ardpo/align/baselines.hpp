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

#include <vector>

#include "ardpo/ardm/model.hpp"
#include "ardpo/netcore/adamw.hpp"
#include "ardpo/rewards/rewards.hpp"
#include "ardpo/schedule/schedule.hpp"

namespace ardpo::align {

using ardm::ArdmModel;
using ardm::Sequence;
using netcore::Rng;

// Prompt i is prefdata::draw_prompt(rng, i, .); candidate c of prompt i
// samples from rng.split(i).split(1).split(c). Every evaluation helper below
// uses this layout, so a policy's plain samples are its first candidates.
struct SampleSpec {
  std::size_t prompts = 500;
  std::size_t length = 16;
  schedule::SamplerConfig sampler;
};

std::vector<Sequence> sample_candidates(const ArdmModel& model, const SampleSpec& spec,
                                        std::size_t candidate, const Rng& rng);

struct RewardStats {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> values;
};

RewardStats reward_stats(std::vector<double> values);

// Mean over prompts of the largest reward among K samples.
RewardStats best_of_k(const ArdmModel& model, const rewards::RewardSpec& reward, std::size_t k,
                      const SampleSpec& spec, const Rng& rng);

struct RaftConfig {
  std::size_t candidates = 32;
  std::size_t sft_steps = 100;
  std::size_t batch = 32;
  netcore::AdamWHyper optimizer = netcore::adamw_preset("pretrain");
  SampleSpec sampling{128, 16, {}};
};

// Samples K candidates per prompt from the current policy, keeps the best one
// and fine-tunes on the kept sequences with the pretraining loss.
ArdmModel raft_iteration(const ArdmModel& policy, const rewards::RewardSpec& reward,
                         const RaftConfig& cfg, const Rng& rng);

}  // namespace ardpo::align

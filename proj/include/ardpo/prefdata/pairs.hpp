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
#include <optional>
#include <string>
#include <vector>

#include "ardpo/ardm/sampler.hpp"
#include "ardpo/rewards/rewards.hpp"

namespace ardpo::prefdata {

using ardm::Sequence;
using netcore::Rng;
using netcore::Tensor;

inline constexpr double kDefaultTieEpsilon = 1e-9;

struct PreferencePair {
  Tensor prompt;
  Sequence winner;
  Sequence loser;
  double reward_winner = 0.0;
  double reward_loser = 0.0;
  std::string model_hash;
  std::uint64_t seed = 0;

  // r_w > r_l and both sequences carry the pair's prompt.
  void validate() const;
};

// Candidate counts used for pair mining: 32 ("task-a") and 16 ("task-b").
std::size_t candidate_preset(std::string_view task);

// K independent samples; candidate k draws from rng.split(k).
std::vector<Sequence> generate_candidates(const ardm::Denoiser& model, const Tensor& prompt,
                                          std::size_t k, std::size_t length,
                                          const schedule::SamplerConfig& sampler, const Rng& rng);

struct Selection {
  std::size_t winner = 0;
  std::size_t loser = 0;
  double reward_winner = 0.0;
  double reward_loser = 0.0;
};

// argmax / argmin of the rewards with lowest-index tie breaking; nullopt
// (skip) when max - min < tie_epsilon.
std::optional<Selection> select_pair(const std::vector<double>& rewards,
                                     double tie_epsilon = kDefaultTieEpsilon);
std::optional<Selection> select_pair(const std::vector<Sequence>& candidates,
                                     const rewards::RewardSpec& spec,
                                     double tie_epsilon = kDefaultTieEpsilon);

struct MiningConfig {
  std::size_t candidates = 32;
  std::size_t pairs = 4000;
  std::size_t length = 16;
  double tie_epsilon = kDefaultTieEpsilon;
  // Prompt draws give up after this many skipped prompts in a row.
  std::size_t max_consecutive_skips = 1000;
};

// Draws the i-th evaluation / mining prompt c_i ~ N(0, I).
Tensor draw_prompt(const Rng& master, std::size_t index, std::size_t prompt_dim);

}  // namespace ardpo::prefdata

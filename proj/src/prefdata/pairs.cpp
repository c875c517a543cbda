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

#include "ardpo/prefdata/pairs.hpp"

#include "ardpo/error.hpp"

namespace ardpo::prefdata {

void PreferencePair::validate() const {
  if (!(reward_winner > reward_loser)) {
    throw InvalidArgument("preference pair: winner reward must exceed loser reward");
  }
  if (winner.prompt != prompt || loser.prompt != prompt) {
    throw InvalidArgument("preference pair: winner and loser must share the prompt");
  }
  if (winner.token_dim() != loser.token_dim()) {
    throw InvalidArgument("preference pair: token widths differ");
  }
}

std::size_t candidate_preset(std::string_view task) {
  if (task == "task-a") return 32;
  if (task == "task-b") return 16;
  throw ConfigError("unknown task preset: " + std::string(task));
}

std::vector<Sequence> generate_candidates(const ardm::Denoiser& model, const Tensor& prompt,
                                          std::size_t k, std::size_t length,
                                          const schedule::SamplerConfig& sampler, const Rng& rng) {
  if (k < 2) throw InvalidArgument("generate_candidates: K must be at least 2");
  std::vector<Tensor> prompts(k, prompt);
  std::vector<Rng> rngs;
  rngs.reserve(k);
  for (std::size_t i = 0; i < k; ++i) rngs.push_back(rng.split(i));
  return ardm::sample_batch(model, prompts, length, sampler, rngs);
}

std::optional<Selection> select_pair(const std::vector<double>& rewards, double tie_epsilon) {
  if (rewards.empty()) throw InvalidArgument("select_pair: no candidates");
  Selection s;
  for (std::size_t i = 1; i < rewards.size(); ++i) {
    if (rewards[i] > rewards[s.winner]) s.winner = i;
    if (rewards[i] < rewards[s.loser]) s.loser = i;
  }
  s.reward_winner = rewards[s.winner];
  s.reward_loser = rewards[s.loser];
  if (rewards.size() < 2 || s.reward_winner - s.reward_loser < tie_epsilon) return std::nullopt;
  return s;
}

std::optional<Selection> select_pair(const std::vector<Sequence>& candidates,
                                     const rewards::RewardSpec& spec, double tie_epsilon) {
  std::vector<double> r;
  r.reserve(candidates.size());
  for (const Sequence& c : candidates) r.push_back(rewards::reward_of(spec, c));
  return select_pair(r, tie_epsilon);
}

Tensor draw_prompt(const Rng& master, std::size_t index, std::size_t prompt_dim) {
  const Rng r = master.split(index).split(0);
  Tensor c = Tensor::vector(prompt_dim);
  for (std::size_t j = 0; j < prompt_dim; ++j) c[j] = r.normal_at(j);
  return c;
}

}  // namespace ardpo::prefdata

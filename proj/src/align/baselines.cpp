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

#include "ardpo/align/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "ardpo/ardm/pretrain.hpp"
#include "ardpo/ardm/sampler.hpp"
#include "ardpo/error.hpp"
#include "ardpo/prefdata/pairs.hpp"

namespace ardpo::align {

namespace {

constexpr std::size_t kChunk = 256;

}  // namespace

std::vector<Sequence> sample_candidates(const ArdmModel& model, const SampleSpec& spec,
                                        std::size_t candidate, const Rng& rng) {
  const ardm::CachedArdm denoiser(model);
  std::vector<Sequence> out;
  out.reserve(spec.prompts);
  for (std::size_t begin = 0; begin < spec.prompts; begin += kChunk) {
    const std::size_t end = std::min(spec.prompts, begin + kChunk);
    std::vector<netcore::Tensor> prompts;
    std::vector<Rng> rngs;
    for (std::size_t i = begin; i < end; ++i) {
      prompts.push_back(prefdata::draw_prompt(rng, i, model.arch().prompt_dim));
      rngs.push_back(rng.split(i).split(1).split(candidate));
    }
    auto batch = ardm::sample_batch(denoiser, prompts, spec.length, spec.sampler, rngs);
    for (Sequence& s : batch) out.push_back(std::move(s));
  }
  return out;
}

RewardStats reward_stats(std::vector<double> values) {
  RewardStats s;
  s.values = std::move(values);
  if (s.values.empty()) return s;
  const double n = static_cast<double>(s.values.size());
  for (double v : s.values) s.mean += v;
  s.mean /= n;
  if (s.values.size() > 1) {
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
    s.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return s;
}

RewardStats best_of_k(const ArdmModel& model, const rewards::RewardSpec& reward, std::size_t k,
                      const SampleSpec& spec, const Rng& rng) {
  if (k < 1) throw InvalidArgument("best_of_k: K must be at least 1");
  reward.validate(model.arch().token_dim);
  std::vector<double> best(spec.prompts, -INFINITY);
  for (std::size_t c = 0; c < k; ++c) {
    const auto seqs = sample_candidates(model, spec, c, rng);
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      best[i] = std::max(best[i], rewards::reward_of(reward, seqs[i]));
    }
  }
  return reward_stats(std::move(best));
}

ArdmModel raft_iteration(const ArdmModel& policy, const rewards::RewardSpec& reward,
                         const RaftConfig& cfg, const Rng& rng) {
  if (cfg.candidates < 1) throw InvalidArgument("raft: K must be at least 1");
  ArdmModel out(policy.arch(), policy.params().thawed_copy());
  if (cfg.sft_steps == 0) return out;
  if (cfg.batch == 0) throw InvalidArgument("raft: batch must be positive");
  reward.validate(policy.arch().token_dim);

  const Rng sample_rng = rng.split(0);
  std::vector<Sequence> kept;
  std::vector<double> best(cfg.sampling.prompts, -INFINITY);
  kept.resize(cfg.sampling.prompts);
  for (std::size_t c = 0; c < cfg.candidates; ++c) {
    auto seqs = sample_candidates(policy, cfg.sampling, c, sample_rng);
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      const double r = rewards::reward_of(reward, seqs[i]);
      if (r > best[i]) {
        best[i] = r;
        kept[i] = std::move(seqs[i]);
      }
    }
  }

  netcore::AdamWState state = netcore::AdamWState::init(out.params(), cfg.optimizer);
  const Rng pick_rng = rng.split(1);
  const Rng loss_rng = rng.split(2);
  std::vector<Sequence> batch(cfg.batch);
  for (std::size_t step = 0; step < cfg.sft_steps; ++step) {
    const Rng r = pick_rng.split(step);
    for (std::size_t b = 0; b < cfg.batch; ++b) batch[b] = kept[r.bits_at(b) % kept.size()];
    const auto lg = ardm::pretrain_loss(out, batch, loss_rng.split(step));
    netcore::adamw_step(out.mutable_params(), lg.grads, state);
  }
  return out;
}

}  // namespace ardpo::align

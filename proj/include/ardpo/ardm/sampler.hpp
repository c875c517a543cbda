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
#include <memory>
#include <span>
#include <vector>

#include "ardpo/ardm/model.hpp"
#include "ardpo/schedule/schedule.hpp"

namespace ardpo::ardm {

// Per-batch state of a token-by-token denoiser. All sequences of a batch
// advance in lockstep: velocity() is queried for the current token of every
// sequence (rows of x_t), commit() appends the denoised tokens to history.
class DenoiserState {
 public:
  virtual ~DenoiserState() = default;
  virtual Tensor velocity(const Tensor& x_t, double t, Conditioning cond) = 0;
  virtual void commit(const Tensor& tokens) = 0;
};

class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual std::size_t token_dim() const = 0;
  virtual std::unique_ptr<DenoiserState> begin(std::span<const Tensor> prompts) const = 0;
};

// Forward-only ARDM inference with cached per-block keys/values, so that each
// new token costs one encoder row per branch.
class CachedArdm : public Denoiser {
 public:
  explicit CachedArdm(const ArdmModel& model) : model_(&model) {}
  std::size_t token_dim() const override { return model_->arch().token_dim; }
  std::unique_ptr<DenoiserState> begin(std::span<const Tensor> prompts) const override;

 private:
  const ArdmModel* model_;
};

// s_n^t: history x0_{<n} fully denoised and the current token at level t.
struct ChainState {
  std::size_t sequence = 0;
  std::size_t n = 0;  // 1-based token index
  double t = 1.0;
  Tensor history;     // (n-1) x d
  Tensor current;     // x_n^t
};

using ChainObserver = std::function<void(const ChainState&)>;

// Runs the ARDM chain for a batch of prompts: for n = 1..N draw x_n at t = 1,
// take num_steps sampler steps with guided velocity, append the token.
// rngs[i] drives sequence i; token n of sequence i draws from rngs[i].split(n).
std::vector<Sequence> sample_batch(const Denoiser& denoiser, std::span<const Tensor> prompts,
                                   std::size_t length, const schedule::SamplerConfig& sampler,
                                   std::span<const Rng> rngs, const ChainObserver& observer = {});

Sequence sample_sequence(const Denoiser& denoiser, const Tensor& prompt, std::size_t length,
                         const schedule::SamplerConfig& sampler, const Rng& rng);

}  // namespace ardpo::ardm

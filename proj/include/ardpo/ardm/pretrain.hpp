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

#include <span>
#include <vector>

#include "ardpo/ardm/model.hpp"

namespace ardpo::ardm {

// Monte-Carlo draws for one sequence: a diffusion time and an x1 noise
// vector per token, plus the conditional-dropout decision.
struct TokenDraws {
  std::vector<double> times;
  Tensor noise;
  bool drop_condition = false;
};

// Draws are keyed on the generator alone, so any evaluation order of a batch
// yields the same values.
TokenDraws draw_tokens(const Rng& rng, std::size_t length, std::size_t token_dim,
                       double cond_dropout);

struct LossAndGrad {
  double loss = 0.0;
  ParamSet grads;
};

// Mean over sequences and tokens of ||v(x_t) - (x1 - x0)||^2 / d with one
// (t, x1) draw per token; sequence i uses rng.split(i).
LossAndGrad pretrain_loss(const ArdmModel& model, std::span<const Sequence> batch, const Rng& rng);

// Same estimator for any velocity model, value only.
double denoising_loss(const VelocityModel& model, std::span<const Sequence> batch, const Rng& rng,
                      double cond_dropout);

}  // namespace ardpo::ardm

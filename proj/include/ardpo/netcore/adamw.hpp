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
#include <string_view>

#include "ardpo/netcore/param_set.hpp"

namespace ardpo::netcore {

struct AdamWHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 0.0;
  double eps = 1e-8;

  void validate() const;
};

// Named presets: "paper-dpo" (lr 2e-6, betas 0.9/0.95, wd 0.01),
// "desk-dpo" (lr 1e-3, betas 0.9/0.95, wd 0.01) and "pretrain".
AdamWHyper adamw_preset(std::string_view name);

struct AdamWState {
  AdamWHyper hyper;
  ParamSet m;
  ParamSet v;
  std::int64_t step = 0;

  static AdamWState init(const ParamSet& params, const AdamWHyper& hyper);
};

// One decoupled-weight-decay Adam update:
//   p <- p - lr*wd*p;  m,v <- moments(g);  p <- p - lr * mhat / (sqrt(vhat) + eps)
// Throws NumericError naming the parameter when a gradient is not finite.
void adamw_step(ParamSet& params, const ParamSet& grads, AdamWState& state);

}  // namespace ardpo::netcore

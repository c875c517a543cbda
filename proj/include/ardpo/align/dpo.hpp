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

#include <string_view>
#include <vector>

#include "ardpo/ardm/model.hpp"
#include "ardpo/netcore/adamw.hpp"
#include "ardpo/prefdata/pairs.hpp"

namespace ardpo::align {

using ardm::ArdmModel;
using ardm::Sequence;
using netcore::ParamSet;
using netcore::Rng;
using netcore::Tensor;
using prefdata::PreferencePair;

struct DpoDiagnostics {
  double margin = 0.0;
  double loss = 0.0;
  double delta_plus = 0.0;   // err_theta(winner) - err_ref(winner)
  double delta_minus = 0.0;  // err_theta(loser) - err_ref(loser)
  double margin_accuracy = 0.0;
};

struct PairLoss {
  double loss = 0.0;
  ParamSet grads;
  DpoDiagnostics diagnostics;
};

// -log(sigmoid(m)) without overflow.
double softplus_neg(double m) noexcept;
double sigmoid(double m) noexcept;

// One-pair v-prediction DPO objective. A single t ~ U(0, 1) (rng.uniform_at(0))
// is shared by both sequences; the x1 noise of a sequence is keyed by its
// content, so swapping winner and loser reuses the same draws. err(.) is the
// token mean of the squared v-error, and
//   margin = scale * [(err_ref(w) - err_theta(w)) - (err_ref(l) - err_theta(l))]
// with scale = beta / d when d_norm is set, beta otherwise.
PairLoss dpo_pair_loss(const ArdmModel& policy, const ArdmModel& ref, const PreferencePair& pair,
                       double beta, const Rng& rng, bool d_norm = true, bool with_grads = true);

// beta grids: "task-a" -> {200, 400, 800}, "task-b" -> {800, 1600, 3200}.
std::vector<double> beta_preset(std::string_view task);

}  // namespace ardpo::align

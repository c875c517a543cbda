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

#include "ardpo/netcore/param_set.hpp"
#include "ardpo/netcore/rng.hpp"
#include "ardpo/netcore/tape.hpp"

namespace ardpo::netcore {

// Scalar objective with analytic gradient. `grads` is null when only the
// value is needed.
using Objective = std::function<double(const ParamSet& params, ParamSet* grads)>;

// Builds a graph on the tape and returns its output node.
using GraphBuilder = std::function<NodeId(Tape& tape)>;

struct Reduction {
  Tensor loss;          // must hold exactly one element
  Tensor output_grad;   // d loss / d output
};
using LossReducer = std::function<Reduction(const Tensor& output)>;

struct GradCheckOptions {
  double eps = 1e-6;
  double sample_fraction = 0.05;
  std::size_t min_samples = 16;
};

// Max over a random sample of scalar parameters of
//   |analytic - central difference| / max(1, |analytic|).
double grad_check(const ParamSet& params, const Objective& objective, Rng rng,
                  const GradCheckOptions& options = {});

// Convenience form for a single tape graph followed by a loss reducer.
// Throws InvalidArgument when the reducer yields a non-scalar loss.
double grad_check(const ParamSet& params, const GraphBuilder& graph, const LossReducer& reducer,
                  Rng rng, const GradCheckOptions& options = {});

// Wraps a graph + reducer as an Objective.
Objective make_objective(GraphBuilder graph, LossReducer reducer);

}  // namespace ardpo::netcore

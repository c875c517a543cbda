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

#include "ardpo/netcore/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ardpo/error.hpp"

namespace ardpo::netcore {

Objective make_objective(GraphBuilder graph, LossReducer reducer) {
  return [graph = std::move(graph), reducer = std::move(reducer)](const ParamSet& params,
                                                                  ParamSet* grads) {
    Tape tape(params);
    const NodeId out = graph(tape);
    Reduction r = reducer(tape.value(out));
    if (r.loss.size() != 1) {
      throw InvalidArgument("grad_check: loss reducer returned " + std::to_string(r.loss.size()) +
                            " values, expected a scalar");
    }
    if (grads) *grads = tape.backward(out, r.output_grad).params;
    return r.loss[0];
  };
}

double grad_check(const ParamSet& params, const Objective& objective, Rng rng,
                  const GradCheckOptions& options) {
  if (!(options.eps >= 1e-8 && options.eps <= 1e-3)) {
    throw InvalidArgument("grad_check: eps must lie in [1e-8, 1e-3]");
  }
  ParamSet analytic;
  objective(params, &analytic);

  struct Slot {
    const std::string* path;
    std::size_t index;
  };
  std::vector<Slot> slots;
  for (const auto& [path, t] : params) {
    for (std::size_t i = 0; i < t.size(); ++i) slots.push_back({&path, i});
  }
  if (slots.empty()) return 0.0;
  const auto wanted = std::max<std::size_t>(
      options.min_samples,
      static_cast<std::size_t>(std::ceil(options.sample_fraction * static_cast<double>(slots.size()))));
  const std::size_t count = std::min(wanted, slots.size());
  // Partial Fisher-Yates for a sample without replacement.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.next_below(slots.size() - i);
    std::swap(slots[i], slots[j]);
  }

  ParamSet probe = params.thawed_copy();
  double worst = 0.0;
  for (std::size_t s = 0; s < count; ++s) {
    const Slot& slot = slots[s];
    const double original = params.at(*slot.path)[slot.index];
    probe.mutable_at(*slot.path)[slot.index] = original + options.eps;
    const double up = objective(probe, nullptr);
    probe.mutable_at(*slot.path)[slot.index] = original - options.eps;
    const double down = objective(probe, nullptr);
    probe.mutable_at(*slot.path)[slot.index] = original;
    const double numeric = (up - down) / (2.0 * options.eps);
    const double a = analytic.at(*slot.path)[slot.index];
    worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a)));
  }
  return worst;
}

double grad_check(const ParamSet& params, const GraphBuilder& graph, const LossReducer& reducer,
                  Rng rng, const GradCheckOptions& options) {
  return grad_check(params, make_objective(graph, reducer), rng, options);
}

}  // namespace ardpo::netcore

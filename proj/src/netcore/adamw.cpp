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

#include "ardpo/netcore/adamw.hpp"

#include <cmath>
#include <string>

#include "ardpo/error.hpp"

namespace ardpo::netcore {

void AdamWHyper::validate() const {
  if (!(lr > 0.0)) throw InvalidArgument("adamw: lr must be positive");
  // Zero betas are accepted so that the degenerate sign-descent case can be
  // exercised.
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw InvalidArgument("adamw: beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw InvalidArgument("adamw: beta2 must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw InvalidArgument("adamw: weight_decay must be non-negative");
  if (!(eps >= 0.0)) throw InvalidArgument("adamw: eps must be non-negative");
}

AdamWHyper adamw_preset(std::string_view name) {
  if (name == "paper-dpo") return {2e-6, 0.9, 0.95, 0.01, 1e-8};
  if (name == "desk-dpo") return {1e-3, 0.9, 0.95, 0.01, 1e-8};
  if (name == "pretrain") return {1e-3, 0.9, 0.999, 0.0, 1e-8};
  throw ConfigError("unknown optimizer preset: " + std::string(name));
}

AdamWState AdamWState::init(const ParamSet& params, const AdamWHyper& hyper) {
  hyper.validate();
  return AdamWState{hyper, params.zeros_like(), params.zeros_like(), 0};
}

void adamw_step(ParamSet& params, const ParamSet& grads, AdamWState& state) {
  const AdamWHyper& h = state.hyper;
  h.validate();
  if (!params.same_layout(grads)) throw ShapeError("adamw: gradient layout differs from parameters");
  if (!params.same_layout(state.m) || !params.same_layout(state.v)) {
    throw ShapeError("adamw: optimizer moments do not mirror parameters");
  }
  for (const auto& [path, g] : grads) {
    if (!g.all_finite()) throw NumericError("adamw: non-finite gradient for parameter " + path);
  }

  const std::int64_t step = state.step + 1;
  const double bias1 = 1.0 - std::pow(h.beta1, static_cast<double>(step));
  const double bias2 = 1.0 - std::pow(h.beta2, static_cast<double>(step));
  for (const auto& [path, g] : grads) {
    auto p = params.mutable_at(path).data();
    auto m = state.m.mutable_at(path).data();
    auto v = state.v.mutable_at(path).data();
    const auto gd = g.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] -= h.lr * h.weight_decay * p[i];
      m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * gd[i];
      v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * gd[i] * gd[i];
      const double mhat = m[i] / bias1;
      const double vhat = v[i] / bias2;
      const double denom = std::sqrt(vhat) + h.eps;
      // 0/0 only arises for g == 0 with eps == 0; the update is then zero.
      if (denom > 0.0) p[i] -= h.lr * mhat / denom;
    }
  }
  state.step = step;
}

}  // namespace ardpo::netcore

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

#include "ardpo/schedule/schedule.hpp"

#include <cmath>
#include <string>

#include "ardpo/error.hpp"

namespace ardpo::schedule {

namespace {

void require_time(double t, const char* what) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidArgument(std::string(what) + ": t = " + std::to_string(t) + " outside [0, 1]");
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shapes " + netcore::shape_string(a.shape()) + " and " +
                     netcore::shape_string(b.shape()) + " differ");
  }
}

}  // namespace

NoiseSchedule::Point NoiseSchedule::at(double t) const { return {1.0 - t, t, -1.0, 1.0}; }

NoiseSchedule::Point alpha_sigma(const NoiseSchedule& sched, double t) {
  require_time(t, "alpha_sigma");
  return sched.at(t);
}

std::vector<double> SamplerConfig::time_grid() const {
  validate();
  std::vector<double> grid(static_cast<std::size_t>(num_steps) + 1);
  for (int i = 0; i <= num_steps; ++i) {
    grid[static_cast<std::size_t>(i)] =
        static_cast<double>(num_steps - i) / static_cast<double>(num_steps);
  }
  return grid;
}

void SamplerConfig::validate() const {
  if (num_steps < 1) throw ConfigError("sampler: steps must be at least 1");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("sampler: eta must lie in [0, 1]");
  if (!(guidance_w >= 0.0)) throw ConfigError("sampler: guidance_w must be non-negative");
}

Perturbed perturb(const NoiseSchedule& sched, const Tensor& x0, const Tensor& x1, double t) {
  require_same_shape(x0, x1, "perturb");
  const auto p = alpha_sigma(sched, t);
  Perturbed out{Tensor(x0.shape()), Tensor(x0.shape())};
  for (std::size_t i = 0; i < x0.size(); ++i) {
    out.x_t[i] = p.alpha * x0[i] + p.sigma * x1[i];
    out.v_target[i] = p.alpha_dot * x0[i] + p.sigma_dot * x1[i];
  }
  return out;
}

Endpoints pred_to_endpoints(const NoiseSchedule& sched, const Tensor& x_t, const Tensor& v_hat,
                            double t) {
  require_same_shape(x_t, v_hat, "pred_to_endpoints");
  require_time(t, "pred_to_endpoints");
  (void)sched;
  Endpoints out{Tensor(x_t.shape()), Tensor(x_t.shape())};
  for (std::size_t i = 0; i < x_t.size(); ++i) {
    out.x0[i] = x_t[i] - t * v_hat[i];
    out.x1[i] = x_t[i] + (1.0 - t) * v_hat[i];
  }
  return out;
}

double churn_std(const NoiseSchedule& sched, double t, double t_next, double eta) {
  const auto now = alpha_sigma(sched, t);
  const auto next = alpha_sigma(sched, t_next);
  if (eta == 0.0 || next.sigma == 0.0) return 0.0;
  // Forward transition x_t = r x_{t_next} + tau * noise.
  const double r = now.alpha / next.alpha;
  const double tau2 = now.sigma * now.sigma - r * r * next.sigma * next.sigma;
  const double posterior_var = std::max(0.0, tau2) * next.sigma * next.sigma / (now.sigma * now.sigma);
  return eta * std::sqrt(posterior_var);
}

Tensor sampler_step(const NoiseSchedule& sched, const Tensor& x_t, const Tensor& v_hat, double t,
                    double t_next, double eta, const Tensor& noise) {
  require_time(t, "sampler_step");
  require_time(t_next, "sampler_step");
  if (!(t_next < t)) {
    throw InvalidArgument("sampler_step: t_next (" + std::to_string(t_next) +
                          ") must be below t (" + std::to_string(t) + ")");
  }
  if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidArgument("sampler_step: eta must lie in [0, 1]");
  require_same_shape(x_t, v_hat, "sampler_step");

  const auto next = sched.at(t_next);
  Tensor out(x_t.shape());
  if (eta == 0.0) {
    // alpha' (x_t - t v) + sigma' (x_t + (1 - t) v) collapses to the Euler form.
    for (std::size_t i = 0; i < x_t.size(); ++i) out[i] = x_t[i] - (t - t_next) * v_hat[i];
    return out;
  }
  require_same_shape(x_t, noise, "sampler_step");
  const Endpoints ends = pred_to_endpoints(sched, x_t, v_hat, t);
  const double c = churn_std(sched, t, t_next, eta);
  const double keep = std::sqrt(std::max(0.0, next.sigma * next.sigma - c * c));
  for (std::size_t i = 0; i < x_t.size(); ++i) {
    out[i] = next.alpha * ends.x0[i] + keep * ends.x1[i] + c * noise[i];
  }
  return out;
}

Tensor guidance_combine(const Tensor& v_cond, const Tensor& v_uncond, double w) {
  require_same_shape(v_cond, v_uncond, "guidance_combine");
  if (!(w >= 0.0)) throw InvalidArgument("guidance_combine: w must be non-negative");
  if (w == 1.0) return v_cond;
  if (w == 0.0) return v_uncond;
  Tensor out(v_cond.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = v_uncond[i] + w * (v_cond[i] - v_uncond[i]);
  }
  return out;
}

}  // namespace ardpo::schedule

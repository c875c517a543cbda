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

#include <vector>

#include "ardpo/netcore/tensor.hpp"

namespace ardpo::schedule {

using netcore::Tensor;

// Linear interpolant x_t = (1 - t) x0 + t x1 on t in [0, 1]; t = 1 is noise.
struct NoiseSchedule {
  struct Point {
    double alpha;
    double sigma;
    double alpha_dot;
    double sigma_dot;
  };

  Point at(double t) const;
};

struct Perturbed {
  Tensor x_t;
  Tensor v_target;
};

struct Endpoints {
  Tensor x0;
  Tensor x1;
};

struct SamplerConfig {
  int num_steps = 16;
  double eta = 0.0;
  double guidance_w = 2.0;

  // Uniform descending grid {1, 1 - 1/n, ..., 0}; num_steps + 1 points.
  std::vector<double> time_grid() const;
  void validate() const;
};

// Throws InvalidArgument when t lies outside [0, 1].
NoiseSchedule::Point alpha_sigma(const NoiseSchedule& sched, double t);

// x_t = alpha x0 + sigma x1; v_target = alpha_dot x0 + sigma_dot x1.
Perturbed perturb(const NoiseSchedule& sched, const Tensor& x0, const Tensor& x1, double t);

// Inverts the parameterization: alpha x0_hat + sigma x1_hat == x_t.
Endpoints pred_to_endpoints(const NoiseSchedule& sched, const Tensor& x_t, const Tensor& v_hat,
                            double t);

// One reverse step from t to t_next < t. With eta = 0 this is the
// deterministic update alpha' x0_hat + sigma' x1_hat (the Euler step
// x_t - (t - t_next) v_hat). With eta = 1 it samples the DDPM posterior
// q(x_{t_next} | x_t, x0 = x0_hat); intermediate eta scale the injected noise
// standard deviation. `noise` is a standard normal tensor shaped like x_t.
Tensor sampler_step(const NoiseSchedule& sched, const Tensor& x_t, const Tensor& v_hat, double t,
                    double t_next, double eta, const Tensor& noise);

// Standard deviation of the fresh noise injected by sampler_step.
double churn_std(const NoiseSchedule& sched, double t, double t_next, double eta);

// v_uncond + w (v_cond - v_uncond); w == 1 returns v_cond and w == 0 returns
// v_uncond exactly.
Tensor guidance_combine(const Tensor& v_cond, const Tensor& v_uncond, double w);

}  // namespace ardpo::schedule

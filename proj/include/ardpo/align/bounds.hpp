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

#include <cstddef>
#include <vector>

#include "ardpo/netcore/rng.hpp"

namespace ardpo::align {

struct Gaussian1 {
  double mean = 0.0;
  double variance = 1.0;
};

// Discrete Gaussian diffusion on the real line, levels 0..T with
// q(x^t | x^0) = N(alpha_t x^0, sigma_t^2); level 0 is the data.
class GaussianChain {
 public:
  GaussianChain(std::vector<double> alphas, std::vector<double> sigmas);

  std::size_t steps() const noexcept { return alphas_.size() - 1; }
  double alpha(std::size_t t) const { return alphas_.at(t); }
  double sigma(std::size_t t) const { return sigmas_.at(t); }

  // Variance of x^t given x^{t-1}.
  double increment_variance(std::size_t t) const;
  Gaussian1 posterior(std::size_t t, double x_t, double x0) const;

 private:
  std::vector<double> alphas_;
  std::vector<double> sigmas_;
};

// Reverse kernel p(x^{t-1} | x^t) = N(scale * x^t + shift, variance).
struct GaussianKernel {
  double scale = 1.0;
  double shift = 0.0;
  double variance = 1.0;
};

// E_{x ~ q} [log p(x)] for Gaussians q and p.
double expected_log_density(const Gaussian1& q, const Gaussian1& p) noexcept;

// E_{q(x^{t-1} | x^t, x^0)} log(policy / reference), i.e.
// KL(q || reference) - KL(q || policy).
double expected_log_ratio(const GaussianChain& chain, std::size_t t, double x_t, double x0,
                          const GaussianKernel& policy, const GaussianKernel& reference);

// One-token preference instance with per-step kernels (index t - 1).
struct JensenInstance {
  GaussianChain chain;
  std::vector<GaussianKernel> policy;
  std::vector<GaussianKernel> reference;
  double winner = 0.0;
  double loser = 0.0;
  double beta = 1.0;  // multiplies T * E[l(x) - l(y)] in both objectives

  // Two steps, alpha = {1, 0.8, 0.5}, with a policy that moves every
  // reference kernel slightly.
  static JensenInstance two_step();
  void validate() const;
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// L = E_{t, x^t, y^t} log sigmoid(beta T [l_t(x) - l_t(y)]).
Estimate jensen_lower_bound(const JensenInstance& inst, const netcore::Rng& rng, std::size_t samples);
// J = log sigmoid(beta T E_{t, x^t, y^t}[l_t(x) - l_t(y)]), inner mean by
// Monte Carlo; the error is propagated through the delta method.
Estimate jensen_objective(const JensenInstance& inst, const netcore::Rng& rng, std::size_t samples);

// Linear schedule (alpha = 1 - t, sigma = t): posterior q(x_{t'} | x_t, x0)
// for 0 < t' < t < 1.
Gaussian1 linear_posterior(double t, double t_next, double x_t, double x0);

// The reverse model uses the posterior with x0 replaced by x_t - t v_hat and a
// shared kernel variance. Then, per coordinate,
//   KL(q || p_ref) - KL(q || p_theta) = w * ((v_ref - v)^2 - (v_theta - v)^2)
// with v = x1 - x0 the true velocity and w returned here.
double velocity_kl_weight(double t, double t_next, double kernel_variance);

}  // namespace ardpo::align

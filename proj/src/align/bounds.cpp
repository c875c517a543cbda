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

#include "ardpo/align/bounds.hpp"

#include <cmath>
#include <numbers>

#include "ardpo/align/dpo.hpp"
#include "ardpo/error.hpp"

namespace ardpo::align {

GaussianChain::GaussianChain(std::vector<double> alphas, std::vector<double> sigmas)
    : alphas_(std::move(alphas)), sigmas_(std::move(sigmas)) {
  if (alphas_.size() < 2 || alphas_.size() != sigmas_.size()) {
    throw InvalidArgument("chain: need matching alpha/sigma lists with at least two levels");
  }
  if (alphas_[0] != 1.0 || sigmas_[0] != 0.0) throw InvalidArgument("chain: level 0 must be the data");
  for (std::size_t t = 1; t < alphas_.size(); ++t) {
    if (!(alphas_[t] > 0.0) || !(sigmas_[t] > 0.0)) {
      throw InvalidArgument("chain: alpha and sigma must be positive above level 0");
    }
    if (!(increment_variance(t) > 0.0)) throw InvalidArgument("chain: noise must grow with t");
  }
}

double GaussianChain::increment_variance(std::size_t t) const {
  const double r = alphas_.at(t) / alphas_.at(t - 1);
  return sigmas_[t] * sigmas_[t] - r * r * sigmas_[t - 1] * sigmas_[t - 1];
}

Gaussian1 GaussianChain::posterior(std::size_t t, double x_t, double x0) const {
  const double r = alphas_.at(t) / alphas_.at(t - 1);
  const double tau2 = increment_variance(t);
  const double s2 = sigmas_[t] * sigmas_[t];
  const double prev2 = sigmas_[t - 1] * sigmas_[t - 1];
  return {r * prev2 / s2 * x_t + alphas_[t - 1] * tau2 / s2 * x0, tau2 * prev2 / s2};
}

double expected_log_density(const Gaussian1& q, const Gaussian1& p) noexcept {
  const double d = q.mean - p.mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * p.variance) -
         (q.variance + d * d) / (2.0 * p.variance);
}

double expected_log_ratio(const GaussianChain& chain, std::size_t t, double x_t, double x0,
                          const GaussianKernel& policy, const GaussianKernel& reference) {
  const Gaussian1 q = chain.posterior(t, x_t, x0);
  return expected_log_density(q, {policy.scale * x_t + policy.shift, policy.variance}) -
         expected_log_density(q, {reference.scale * x_t + reference.shift, reference.variance});
}

JensenInstance JensenInstance::two_step() {
  GaussianChain chain({1.0, 0.8, 0.5}, {0.0, 0.6, std::sqrt(0.75)});
  std::vector<GaussianKernel> ref;
  std::vector<GaussianKernel> pol;
  for (std::size_t t = 1; t <= chain.steps(); ++t) {
    const double v = chain.increment_variance(t);
    const double keep = chain.alpha(t - 1) / chain.alpha(t);
    ref.push_back({0.5 * keep, 0.0, v});
    pol.push_back({0.55 * keep, 0.1, v});
  }
  return {std::move(chain), std::move(pol), std::move(ref), 1.0, -0.5, 2.0};
}

void JensenInstance::validate() const {
  if (policy.size() != chain.steps() || reference.size() != chain.steps()) {
    throw InvalidArgument("jensen: one kernel per step required");
  }
  for (std::size_t i = 0; i < policy.size(); ++i) {
    if (!(policy[i].variance > 0.0) || !(reference[i].variance > 0.0)) {
      throw InvalidArgument("jensen: kernel variances must be positive");
    }
  }
  if (!(beta > 0.0)) throw InvalidArgument("jensen: beta must be positive");
}

namespace {

// l_t(x) - l_t(y) for draw i: t uniform over 1..T, x^t and y^t from q(.|x^0).
double gap_draw(const JensenInstance& inst, const netcore::Rng& rng, std::size_t i) {
  const netcore::Rng r = rng.split(i);
  const std::size_t steps = inst.chain.steps();
  const std::size_t t = 1 + static_cast<std::size_t>(r.bits_at(0) % steps);
  const double a = inst.chain.alpha(t);
  const double s = inst.chain.sigma(t);
  const double x_t = a * inst.winner + s * r.normal_at(1);
  const double y_t = a * inst.loser + s * r.normal_at(2);
  const GaussianKernel& p = inst.policy[t - 1];
  const GaussianKernel& m = inst.reference[t - 1];
  return expected_log_ratio(inst.chain, t, x_t, inst.winner, p, m) -
         expected_log_ratio(inst.chain, t, y_t, inst.loser, p, m);
}

}  // namespace

Estimate jensen_lower_bound(const JensenInstance& inst, const netcore::Rng& rng, std::size_t samples) {
  inst.validate();
  if (samples < 2) throw InvalidArgument("jensen: need at least two samples");
  const double k = inst.beta * static_cast<double>(inst.chain.steps());
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double v = -softplus_neg(k * gap_draw(inst, rng, i));
    sum += v;
    sq += v * v;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

Estimate jensen_objective(const JensenInstance& inst, const netcore::Rng& rng, std::size_t samples) {
  inst.validate();
  if (samples < 2) throw InvalidArgument("jensen: need at least two samples");
  const double k = inst.beta * static_cast<double>(inst.chain.steps());
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double g = gap_draw(inst, rng, i);
    sum += g;
    sq += g * g;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sq - n * mean * mean) / (n - 1.0));
  // d/dm log sigmoid(k m) = k sigmoid(-k m)
  const double slope = k * sigmoid(-k * mean);
  return {-softplus_neg(k * mean), slope * std::sqrt(var / n)};
}

Gaussian1 linear_posterior(double t, double t_next, double x_t, double x0) {
  if (!(t_next > 0.0 && t_next < t && t < 1.0)) {
    throw InvalidArgument("linear_posterior: need 0 < t' < t < 1");
  }
  const GaussianChain chain({1.0, 1.0 - t_next, 1.0 - t}, {0.0, t_next, t});
  return chain.posterior(2, x_t, x0);
}

double velocity_kl_weight(double t, double t_next, double kernel_variance) {
  if (!(t_next > 0.0 && t_next < t && t < 1.0)) {
    throw InvalidArgument("velocity_kl_weight: need 0 < t' < t < 1");
  }
  if (!(kernel_variance > 0.0)) throw InvalidArgument("velocity_kl_weight: variance must be positive");
  const double a = 1.0 - t;
  const double a_next = 1.0 - t_next;
  const double r = a / a_next;
  const double tau2 = t * t - r * r * t_next * t_next;
  const double c0 = a_next * tau2 / (t * t);
  return (c0 * t) * (c0 * t) / (2.0 * kernel_variance);
}

}  // namespace ardpo::align

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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ardpo/error.hpp"
#include "ardpo/netcore/rng.hpp"
#include "ardpo/schedule/schedule.hpp"

namespace ardpo::schedule {
namespace {

using netcore::Rng;

Tensor scalar(double v) { return Tensor::vector({v}); }

TEST(AlphaSigma, Boundaries) {
  const NoiseSchedule s;
  auto check = [&](double t, double a, double sg) {
    const auto p = alpha_sigma(s, t);
    EXPECT_EQ(p.alpha, a);
    EXPECT_EQ(p.sigma, sg);
    EXPECT_EQ(p.alpha_dot, -1.0);
    EXPECT_EQ(p.sigma_dot, 1.0);
  };
  check(0.0, 1.0, 0.0);
  check(1.0, 0.0, 1.0);
  check(0.25, 0.75, 0.25);
  EXPECT_THROW(alpha_sigma(s, -0.01), InvalidArgument);
  EXPECT_THROW(alpha_sigma(s, 1.01), InvalidArgument);
}

TEST(AlphaSigma, Monotone) {
  const NoiseSchedule s;
  double prev_a = 2.0, prev_s = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const auto p = alpha_sigma(s, i / 100.0);
    EXPECT_LT(p.alpha, prev_a);
    EXPECT_GT(p.sigma, prev_s);
    prev_a = p.alpha;
    prev_s = p.sigma;
  }
}

TEST(Perturb, Examples) {
  const NoiseSchedule s;
  const Tensor x0 = Tensor::vector({0.3, -1.2});
  const Tensor x1 = Tensor::vector({2.0, 0.5});
  EXPECT_EQ(perturb(s, x0, x1, 0.0).x_t, x0);
  EXPECT_EQ(perturb(s, x0, x1, 1.0).x_t, x1);
  const Perturbed p = perturb(s, scalar(0.0), scalar(2.0), 0.5);
  EXPECT_EQ(p.x_t[0], 1.0);
  EXPECT_EQ(p.v_target[0], 2.0);
  EXPECT_THROW(perturb(s, x0, scalar(1.0), 0.5), ShapeError);
}

TEST(Endpoints, ExactVelocityRecoversPair) {
  const NoiseSchedule s;
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor x0 = netcore::gaussian(rng, {3});
    const Tensor x1 = netcore::gaussian(rng, {3});
    const double t = rng.next_uniform();
    const Perturbed p = perturb(s, x0, x1, t);
    const Endpoints e = pred_to_endpoints(s, p.x_t, p.v_target, t);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_NEAR(e.x0[i], x0[i], 1e-12);
      EXPECT_NEAR(e.x1[i], x1[i], 1e-12);
    }
  }
}

TEST(Endpoints, TimeZeroKeepsInput) {
  const NoiseSchedule s;
  const Tensor x = Tensor::vector({1.5, -2.0});
  EXPECT_EQ(pred_to_endpoints(s, x, Tensor::vector({100.0, -7.0}), 0.0).x0, x);
}

TEST(Endpoints, ReconstructionIdentity) {
  const NoiseSchedule s;
  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const Tensor x = netcore::gaussian(rng, {4});
    Tensor v = netcore::gaussian(rng, {4});
    for (double& e : v.data()) e *= 10.0;
    const double t = trial == 0 ? 0.0 : trial == 1 ? 1.0 : rng.next_uniform();
    const Endpoints e = pred_to_endpoints(s, x, v, t);
    const auto p = alpha_sigma(s, t);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_NEAR(p.alpha * e.x0[i] + p.sigma * e.x1[i] - x[i], 0.0, 1e-12);
    }
  }
}

TEST(SamplerStep, PointMassSingleStep) {
  const NoiseSchedule s;
  const double target = 0.7317;
  const Tensor x1 = Tensor::vector({-1.3});
  const Tensor v = Tensor::vector({x1[0] - target});
  EXPECT_DOUBLE_EQ(sampler_step(s, x1, v, 1.0, 0.0, 0.0, {})[0], target);
}

TEST(SamplerStep, DeterministicStepIsEuler) {
  const NoiseSchedule s;
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor x = netcore::gaussian(rng, {2});
    const Tensor v = netcore::gaussian(rng, {2});
    const double a = rng.next_uniform(), b = rng.next_uniform();
    const double t = std::max(a, b), tn = std::min(a, b);
    const Tensor y = sampler_step(s, x, v, t, tn, 0.0, {});
    // Endpoint form alpha' x0_hat + sigma' x1_hat, expanded by hand.
    const Endpoints e = pred_to_endpoints(s, x, v, t);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_NEAR(y[i], x[i] - (t - tn) * v[i], 1e-12);
      EXPECT_NEAR(y[i], (1.0 - tn) * e.x0[i] + tn * e.x1[i], 1e-12);
    }
    EXPECT_EQ(y, sampler_step(s, x, v, t, tn, 0.0, {}));
  }
}

TEST(SamplerStep, RejectsNonDecreasingTime) {
  const NoiseSchedule s;
  EXPECT_THROW(sampler_step(s, scalar(0), scalar(0), 0.5, 0.5, 0.0, {}), InvalidArgument);
  EXPECT_THROW(sampler_step(s, scalar(0), scalar(0), 0.5, 0.6, 0.0, {}), InvalidArgument);
  EXPECT_THROW(sampler_step(s, scalar(0), scalar(0), 0.5, 0.25, 1.5, scalar(0)), InvalidArgument);
}

TEST(SamplerConfigTest, DefaultGrid) {
  const SamplerConfig cfg;
  EXPECT_EQ(cfg.num_steps, 16);
  EXPECT_EQ(cfg.eta, 0.0);
  EXPECT_EQ(cfg.guidance_w, 2.0);
  const std::vector<double> grid = cfg.time_grid();
  ASSERT_EQ(grid.size(), 17u);
  EXPECT_EQ(grid.front(), 1.0);
  EXPECT_EQ(grid.back(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(grid[i], 1.0 - static_cast<double>(i) / 16.0);
  SamplerConfig bad;
  bad.num_steps = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Guidance, Examples) {
  const Tensor c = Tensor::vector({0.1, 0.7});
  const Tensor u = Tensor::vector({-0.4, 0.3});
  EXPECT_EQ(guidance_combine(c, u, 1.0), c);
  EXPECT_EQ(guidance_combine(c, u, 0.0), u);
  EXPECT_EQ(guidance_combine(scalar(1.0), scalar(0.0), 2.0)[0], 2.0);
  EXPECT_THROW(guidance_combine(c, scalar(0.0), 2.0), ShapeError);
}

// Gaussian data N(m, s^2): E[x1 - x0 | x_t] is affine in x_t.
struct OptimalVelocity {
  double m, s2;
  // v = a x_t + b
  std::pair<double, double> coefficients(double t) const {
    const double var = (1 - t) * (1 - t) * s2 + t * t;
    const double g0 = (1 - t) * s2 / var;  // E[x0 | x_t] = m + g0 (x_t - (1-t) m)
    const double g1 = t / var;             // E[x1 | x_t] = g1 (x_t - (1-t) m)
    const double a = g1 - g0;
    return {a, -a * (1 - t) * m - m};
  }
  double operator()(double x, double t) const {
    const auto [a, b] = coefficients(t);
    return a * x + b;
  }
};

// Law of one stochastic step as an affine map x' = A x + B + C e, derived from
// the Markov forward joint (x_{t'}, x_t) given x0.
struct StepLaw {
  double A, B, C;
};

StepLaw step_law(const OptimalVelocity& v, double t, double tn, double eta) {
  const auto [a, b] = v.coefficients(t);
  // x0_hat = x - t v, x1_hat = x + (1 - t) v.
  const double a0 = 1 - t * a, b0 = -t * b;
  const double a1 = 1 + (1 - t) * a, b1 = (1 - t) * b;
  const double r = (1 - t) / (1 - tn);
  const double var_next = tn * tn, var_now = t * t, cov = r * var_next;
  const double post_var = var_next - cov * cov / var_now;
  const double c = eta * std::sqrt(post_var);
  const double keep = std::sqrt(tn * tn - c * c);
  return {(1 - tn) * a0 + keep * a1, (1 - tn) * b0 + keep * b1, c};
}

struct Moments {
  double mean, var;
};

Moments simulate_chain(const OptimalVelocity& v, int steps, double eta, std::size_t n, const Rng& rng) {
  const NoiseSchedule s;
  SamplerConfig cfg;
  cfg.num_steps = steps;
  cfg.eta = eta;
  const std::vector<double> grid = cfg.time_grid();
  Tensor x = Tensor::vector(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rng.split(i).normal_at(0);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    Tensor vh(x.shape()), noise(x.shape());
    for (std::size_t i = 0; i < n; ++i) {
      vh[i] = v(x[i], grid[k]);
      noise[i] = rng.split(i).normal_at(k + 1);
    }
    x = sampler_step(s, x, vh, grid[k], grid[k + 1], eta, noise);
  }
  double mean = 0.0, var = 0.0;
  for (double e : x.data()) mean += e;
  mean /= static_cast<double>(n);
  for (double e : x.data()) var += (e - mean) * (e - mean);
  return {mean, var / static_cast<double>(n)};
}

Moments chain_law(const OptimalVelocity& v, int steps, double eta) {
  Moments m{0.0, 1.0};
  for (int k = 0; k < steps; ++k) {
    const double t = 1.0 - static_cast<double>(k) / steps;
    const double tn = 1.0 - static_cast<double>(k + 1) / steps;
    const StepLaw law = step_law(v, t, tn, eta);
    m = {law.A * m.mean + law.B, law.A * law.A * m.var + law.C * law.C};
  }
  return m;
}

TEST(SamplerStep, PointMassSingleStepMarginalIsExact) {
  // With point-mass data the posterior mean is the data point, so any single
  // stochastic step lands on the exact marginal N(alpha' m, sigma'^2).
  const NoiseSchedule s;
  const OptimalVelocity v{0.6, 0.0};
  const std::size_t n = 100000;
  Rng rng(5);
  for (auto [t, tn] : {std::pair{1.0, 0.5}, std::pair{0.75, 0.3125}}) {
    Tensor x(std::vector<std::size_t>{n}), vh(std::vector<std::size_t>{n}), e(std::vector<std::size_t>{n});
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = (1 - t) * v.m + t * rng.split(i).normal_at(0);
      vh[i] = v(x[i], t);
      e[i] = rng.split(i).normal_at(1);
    }
    const Tensor y = sampler_step(s, x, vh, t, tn, 1.0, e);
    double mean = 0.0, var = 0.0;
    for (double u : y.data()) mean += u;
    mean /= static_cast<double>(n);
    for (double u : y.data()) var += (u - mean) * (u - mean);
    var /= static_cast<double>(n);
    const double want_var = tn * tn;
    EXPECT_LT(std::abs(mean - (1 - tn) * v.m), 3.0 * std::sqrt(want_var / n));
    EXPECT_LT(std::abs(var - want_var), 3.0 * want_var * std::sqrt(2.0 / n));
  }
}

TEST(SamplerStep, SingleStepMatchesStepLaw) {
  const NoiseSchedule s;
  const OptimalVelocity v{1.5, 0.49};
  const std::size_t n = 100000;
  const double t = 0.8125, tn = 0.625;
  Rng rng(6);
  const double var_t = (1 - t) * (1 - t) * v.s2 + t * t;
  Tensor x(std::vector<std::size_t>{n}), vh(std::vector<std::size_t>{n}), e(std::vector<std::size_t>{n});
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = (1 - t) * v.m + std::sqrt(var_t) * rng.split(i).normal_at(0);
    vh[i] = v(x[i], t);
    e[i] = rng.split(i).normal_at(1);
  }
  const Tensor y = sampler_step(s, x, vh, t, tn, 1.0, e);
  double mean = 0.0, var = 0.0;
  for (double u : y.data()) mean += u;
  mean /= static_cast<double>(n);
  for (double u : y.data()) var += (u - mean) * (u - mean);
  var /= static_cast<double>(n);
  const StepLaw law = step_law(v, t, tn, 1.0);
  const double want_var = law.A * law.A * var_t + law.C * law.C;
  EXPECT_LT(std::abs(mean - (1 - tn) * v.m), 3.0 * std::sqrt(want_var / n));
  EXPECT_LT(std::abs(var - want_var), 3.0 * want_var * std::sqrt(2.0 / n));
}

TEST(SamplerStep, StochasticChainMatchesDiscreteLaw) {
  const OptimalVelocity v{1.5, 0.49};
  const std::size_t n = 100000;
  for (double eta : {0.0, 0.5, 1.0}) {
    const Moments got = simulate_chain(v, 16, eta, n, Rng(7).split(static_cast<std::uint64_t>(eta * 10)));
    const Moments want = chain_law(v, 16, eta);
    EXPECT_LT(std::abs(got.mean - want.mean), 3.0 * std::sqrt(want.var / n)) << "eta " << eta;
    EXPECT_LT(std::abs(got.var - want.var), 3.0 * want.var * std::sqrt(2.0 / n)) << "eta " << eta;
    // The mean of the data is reproduced by every member of the family.
    EXPECT_LT(std::abs(got.mean - v.m) / v.m, 0.02) << "eta " << eta;
  }
}

TEST(SamplerStep, ChurnStdBounds) {
  const NoiseSchedule s;
  EXPECT_EQ(churn_std(s, 0.5, 0.25, 0.0), 0.0);
  EXPECT_EQ(churn_std(s, 0.5, 0.0, 1.0), 0.0);
  for (double eta : {0.25, 1.0}) {
    const double c = churn_std(s, 0.75, 0.5, eta);
    EXPECT_GT(c, 0.0);
    EXPECT_LE(c, 0.5);
  }
}

}  // namespace
}  // namespace ardpo::schedule

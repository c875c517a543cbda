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
#include <numbers>

#include <gtest/gtest.h>

#include "ardpo/error.hpp"
#include "ardpo/rewards/rewards.hpp"

namespace ardpo::rewards {
namespace {

Sequence column(std::initializer_list<double> values) {
  Sequence s{Tensor::vector({0.0}), Tensor::matrix(values.size(), 1)};
  std::size_t i = 0;
  for (double v : values) s.tokens.at(i++, 0) = v;
  return s;
}

ArProcess scalar_process(double a, double s) {
  return ArProcess(Tensor::from_rows({{a}}), Tensor::vector(1), s, Tensor::from_rows({{0.0}}));
}

TEST(ArProcessTest, RejectsUnstableOrDegenerate) {
  EXPECT_THROW(scalar_process(1.0, 1.0), InvalidArgument);
  EXPECT_THROW(scalar_process(-1.2, 1.0), InvalidArgument);
  EXPECT_THROW(scalar_process(0.5, 0.0), InvalidArgument);
  // Rotation-like matrix with complex eigenvalues of modulus sqrt(0.5).
  EXPECT_NO_THROW(ArProcess(Tensor::from_rows({{0.5, -0.5}, {0.5, 0.5}}), Tensor::vector(2), 1.0,
                            Tensor::matrix(2, 2)));
  EXPECT_NEAR(spectral_radius(Tensor::from_rows({{0.5, -0.5}, {0.5, 0.5}})), std::sqrt(0.5), 1e-12);
}

TEST(ArProcessTest, DefaultProcess) {
  const ArProcess p = ArProcess::default_process();
  EXPECT_EQ(p.token_dim(), 2u);
  EXPECT_EQ(p.prompt_dim(), 2u);
  EXPECT_EQ(p.noise_scale(), 1.0);
  EXPECT_EQ(p.transition(), Tensor::from_rows({{0.8, 0.0}, {0.0, 0.8}}));
  EXPECT_EQ(p.prompt_map(), Tensor::from_rows({{1.0, 0.0}, {0.0, 1.0}}));
}

TEST(GenSequence, ZeroProcessIsIid) {
  const ArProcess p(Tensor::matrix(2, 2), Tensor::vector(2), 1.7, Tensor::matrix(2, 3));
  const Sequence s = gen_sequence(p, Tensor::vector({5.0, 5.0, 5.0}), 50000, Rng(1));
  double mean[2] = {0, 0}, var[2] = {0, 0}, lag = 0.0;
  const double n = 50000.0;
  for (std::size_t i = 0; i < 50000; ++i) {
    for (std::size_t j = 0; j < 2; ++j) mean[j] += s.tokens.at(i, j) / n;
  }
  for (std::size_t i = 0; i < 50000; ++i) {
    for (std::size_t j = 0; j < 2; ++j) var[j] += std::pow(s.tokens.at(i, j) - mean[j], 2) / n;
    if (i > 0) lag += (s.tokens.at(i, 0) - mean[0]) * (s.tokens.at(i - 1, 0) - mean[0]) / n;
  }
  const double s2 = 1.7 * 1.7;
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_LT(std::abs(mean[j]), 3.0 * std::sqrt(s2 / n));
    EXPECT_LT(std::abs(var[j] - s2), 3.0 * s2 * std::sqrt(2.0 / n));
  }
  EXPECT_LT(std::abs(lag / var[0]), 3.0 / std::sqrt(n));
}

TEST(GenSequence, Ar1LagOneAutocorrelation) {
  const Sequence s = gen_sequence(scalar_process(0.8, 1.0), Tensor::vector({0.0}), 100000, Rng(2));
  const std::size_t n = s.length();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += s.tokens.at(i, 0);
  mean /= static_cast<double>(n);
  double c0 = 0.0, c1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = s.tokens.at(i, 0) - mean;
    c0 += a * a;
    if (i > 0) c1 += a * (s.tokens.at(i - 1, 0) - mean);
  }
  EXPECT_NEAR(c1 / c0, 0.8, 0.01);
}

TEST(GenSequence, Reproducible) {
  const ArProcess p = ArProcess::default_process();
  const Tensor c = Tensor::vector({0.5, -1.0});
  EXPECT_EQ(gen_sequence(p, c, 16, Rng(3)).tokens, gen_sequence(p, c, 16, Rng(3)).tokens);
  EXPECT_NE(gen_sequence(p, c, 16, Rng(3)).tokens, gen_sequence(p, c, 16, Rng(4)).tokens);
  EXPECT_THROW(gen_sequence(p, c, 0, Rng(3)), InvalidArgument);
}

TEST(VarianceReward, Examples) {
  EXPECT_EQ(variance_reward(column({0, 2}), 0), 1.0);
  EXPECT_EQ(variance_reward(column({3.5, 3.5, 3.5, 3.5}), 0), 0.0);
  EXPECT_NEAR(variance_reward(column({0, 1, 2}), 0), 2.0 / 3.0, 1e-15);
  EXPECT_THROW(variance_reward(column({1}), 0), InvalidArgument);
  EXPECT_THROW(variance_reward(column({1, 2}), 1), InvalidArgument);
}

TEST(VarianceReward, TranslationInvariant) {
  // Shifts that are exact in binary keep every intermediate exact.
  Rng rng(5);
  Sequence s{Tensor::vector({0.0}), Tensor::matrix(16, 2)};
  for (double& v : s.tokens.data()) v = std::ldexp(std::round(rng.next_normal() * 64.0), -6);
  Sequence shifted = s;
  for (std::size_t i = 0; i < 16; ++i) {
    shifted.tokens.at(i, 0) += 8.0;
    shifted.tokens.at(i, 1) -= 0.5;
  }
  EXPECT_EQ(variance_reward(s, 0), variance_reward(shifted, 0));
  EXPECT_EQ(variance_reward(s, 1), variance_reward(shifted, 1));
}

TEST(OracleNll, StandardNormalAtMode) {
  const ArProcess p = scalar_process(0.0, 1.0);
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  EXPECT_NEAR(oracle_nll(p, column({0, 0, 0, 0})), half_log_2pi, 1e-15);
  EXPECT_NEAR(half_log_2pi, 0.9189, 1e-4);
  EXPECT_NEAR(oracle_nll(p, column({1, -1, 1})), half_log_2pi + 0.5, 1e-15);
  EXPECT_NEAR(half_log_2pi + 0.5, 1.4189, 1e-4);
}

TEST(OracleNll, ResidualsAtOneSigmaWithMemory) {
  // x_{n+1} = 0.5 x_n + e; choose each token one sigma above its mean.
  const double s = 2.0;
  const ArProcess p = scalar_process(0.5, s);
  Sequence seq = column({0, 0, 0, 0, 0});
  double prev = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    const double mean = i == 0 ? 0.0 : 0.5 * prev;
    seq.tokens.at(i, 0) = mean + s;
    prev = seq.tokens.at(i, 0);
  }
  EXPECT_NEAR(oracle_nll(p, seq), 0.5 * std::log(2.0 * std::numbers::pi * s * s) + 0.5, 1e-14);
}

TEST(OracleNll, MatchesEntropyRate) {
  const ArProcess p = ArProcess::default_process(2, 2, 0.8, 0.7);
  const Rng master(6);
  double total = 0.0;
  const std::size_t seqs = 6250, len = 16;  // 10^5 tokens
  for (std::size_t i = 0; i < seqs; ++i) {
    const Rng r = master.split(i);
    const Tensor c = Tensor::vector({r.normal_at(0), r.normal_at(1)});
    total += oracle_nll(p, gen_sequence(p, c, len, r.split(1)));
  }
  const double mean = total / static_cast<double>(seqs);
  const double entropy = 2.0 * 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * 0.49);
  EXPECT_LT(std::abs(mean - entropy) / std::abs(entropy), 0.01);
}

TEST(OracleNll, MinimizedAtConditionalMeans) {
  const ArProcess p = ArProcess::default_process();
  Sequence seq{Tensor::vector({0.3, -0.6}), Tensor::matrix(8, 2)};
  for (std::size_t n = 0; n < 8; ++n) {
    const Tensor m = p.conditional_mean(seq, n);
    seq.tokens.at(n, 0) = m[0];
    seq.tokens.at(n, 1) = m[1];
  }
  const double best = oracle_nll(p, seq);
  EXPECT_NEAR(best, std::log(2.0 * std::numbers::pi), 1e-14);
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Sequence moved = seq;
    const std::size_t n = rng.next_below(8);
    const std::size_t j = rng.next_below(2);
    const double step = (rng.next_uniform() - 0.5) * 1e-3;
    if (step == 0.0) continue;
    moved.tokens.at(n, j) += step;
    // Later means follow the moved token, so only token n leaves its mean.
    for (std::size_t k = n + 1; k < 8; ++k) {
      const Tensor m = p.conditional_mean(moved, k);
      moved.tokens.at(k, 0) = m[0];
      moved.tokens.at(k, 1) = m[1];
    }
    EXPECT_GT(oracle_nll(p, moved), best);
  }
}

TEST(RewardOf, VarianceAndNll) {
  EXPECT_EQ(reward_of(RewardSpec::variance(0), column({0, 2})), 1.0);
  const RewardSpec nll = RewardSpec::oracle(scalar_process(0.0, 1.0));
  EXPECT_NEAR(reward_of(nll, column({0, 0})), -0.5 * std::log(2.0 * std::numbers::pi), 1e-15);
  EXPECT_THROW(reward_of(RewardSpec::variance(3), column({0, 2})), ConfigError);
  EXPECT_EQ(RewardSpec::variance(0).describe(), "variance:0");
  EXPECT_EQ(nll.describe(), "oracle_nll");
}

TEST(RewardOf, PrefersLowerNll) {
  const ArProcess p = scalar_process(0.0, 1.0);
  const RewardSpec spec = RewardSpec::oracle(p);
  // Residual r gives NLL 0.9189 + r^2 / 2; pick r for NLL 0.3 and 0.5 above
  // the floor.
  const Sequence a = column({std::sqrt(0.6)});
  const Sequence b = column({std::sqrt(1.0)});
  EXPECT_NEAR(oracle_nll(p, a) - oracle_nll(p, b), -0.2, 1e-12);
  EXPECT_GT(reward_of(spec, a), reward_of(spec, b));
  Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    const Sequence x = column({rng.next_normal(), rng.next_normal()});
    const Sequence y = column({rng.next_normal(), rng.next_normal()});
    EXPECT_EQ(reward_of(spec, x) > reward_of(spec, y), oracle_nll(p, x) < oracle_nll(p, y));
  }
}

}  // namespace
}  // namespace ardpo::rewards

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

#include <optional>
#include <string>

#include "ardpo/ardm/model.hpp"
#include "ardpo/netcore/rng.hpp"

namespace ardpo::rewards {

using ardm::Sequence;
using netcore::Rng;
using netcore::Tensor;

// Linear-Gaussian autoregressive source:
//   x_1 = P c + s e_1,   x_{n+1} = A x_n + b + s e_{n+1}.
class ArProcess {
 public:
  // Throws InvalidArgument when s <= 0 or the spectral radius of A is >= 1.
  ArProcess(Tensor transition, Tensor bias, double noise_scale, Tensor prompt_map);

  // d = 2, A = 0.8 I, b = 0, s = 1, P = identity padded to d x d_c.
  static ArProcess default_process(std::size_t token_dim = 2, std::size_t prompt_dim = 2,
                                   double decay = 0.8, double noise_scale = 1.0);

  std::size_t token_dim() const noexcept { return transition_.rows(); }
  std::size_t prompt_dim() const noexcept { return prompt_map_.cols(); }
  double noise_scale() const noexcept { return noise_scale_; }
  const Tensor& transition() const noexcept { return transition_; }
  const Tensor& bias() const noexcept { return bias_; }
  const Tensor& prompt_map() const noexcept { return prompt_map_; }

  // Mean of token n (0-based) given the prompt and the tokens before it.
  Tensor conditional_mean(const Sequence& seq, std::size_t n) const;

 private:
  Tensor transition_;
  Tensor bias_;
  double noise_scale_;
  Tensor prompt_map_;
};

double spectral_radius(const Tensor& square);

Sequence gen_sequence(const ArProcess& proc, const Tensor& prompt, std::size_t length, const Rng& rng);

// Population variance (divide by N) of coordinate k across the tokens.
double variance_reward(const Sequence& seq, std::size_t k);

// (1/N) sum_n -log N(x_n; mean_n, s^2 I).
double oracle_nll(const ArProcess& proc, const Sequence& seq);

struct RewardSpec {
  enum class Kind { Variance, OracleNll };

  Kind kind = Kind::Variance;
  std::size_t feature = 0;
  std::optional<ArProcess> process;

  static RewardSpec variance(std::size_t k) { return {Kind::Variance, k, std::nullopt}; }
  static RewardSpec oracle(ArProcess proc) { return {Kind::OracleNll, 0, std::move(proc)}; }

  void validate(std::size_t token_dim) const;
  std::string describe() const;
};

// Larger is better: variance for Kind::Variance, -oracle_nll for Kind::OracleNll.
double reward_of(const RewardSpec& spec, const Sequence& seq);

}  // namespace ardpo::rewards

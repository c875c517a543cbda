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

#include "ardpo/rewards/rewards.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "ardpo/error.hpp"

namespace ardpo::rewards {

double spectral_radius(const Tensor& square) {
  if (square.rank() != 2 || square.rows() != square.cols()) {
    throw ShapeError("spectral_radius: matrix must be square");
  }
  const Eigen::MatrixXd m = square.mat();
  return m.eigenvalues().cwiseAbs().maxCoeff();
}

ArProcess::ArProcess(Tensor transition, Tensor bias, double noise_scale, Tensor prompt_map)
    : transition_(std::move(transition)),
      bias_(std::move(bias)),
      noise_scale_(noise_scale),
      prompt_map_(std::move(prompt_map)) {
  if (!(noise_scale_ > 0.0)) throw InvalidArgument("ArProcess: noise scale must be positive");
  const std::size_t d = transition_.rows();
  if (transition_.rank() != 2 || transition_.cols() != d || bias_.size() != d ||
      prompt_map_.rank() != 2 || prompt_map_.rows() != d) {
    throw ShapeError("ArProcess: inconsistent A / b / P shapes");
  }
  if (spectral_radius(transition_) >= 1.0) {
    throw InvalidArgument("ArProcess: spectral radius of A must be below 1");
  }
}

ArProcess ArProcess::default_process(std::size_t token_dim, std::size_t prompt_dim, double decay,
                                     double noise_scale) {
  Tensor a = Tensor::matrix(token_dim, token_dim);
  for (std::size_t i = 0; i < token_dim; ++i) a.at(i, i) = decay;
  Tensor p = Tensor::matrix(token_dim, prompt_dim);
  for (std::size_t i = 0; i < std::min(token_dim, prompt_dim); ++i) p.at(i, i) = 1.0;
  return ArProcess(std::move(a), Tensor::vector(token_dim), noise_scale, std::move(p));
}

Tensor ArProcess::conditional_mean(const Sequence& seq, std::size_t n) const {
  const std::size_t d = token_dim();
  Tensor mean = Tensor::vector(d);
  if (n == 0) {
    if (seq.prompt.size() != prompt_dim()) throw ShapeError("ArProcess: prompt width mismatch");
    mean.mat() = seq.prompt.mat() * prompt_map_.mat().transpose();
  } else {
    mean.mat() = seq.tokens.mat().row(static_cast<Eigen::Index>(n - 1)) * transition_.mat().transpose() +
                 bias_.mat();
  }
  return mean;
}

Sequence gen_sequence(const ArProcess& proc, const Tensor& prompt, std::size_t length, const Rng& rng) {
  if (length < 1) throw InvalidArgument("gen_sequence: length must be at least 1");
  const std::size_t d = proc.token_dim();
  Sequence seq{prompt, Tensor::matrix(length, d)};
  for (std::size_t n = 0; n < length; ++n) {
    const Tensor mean = proc.conditional_mean(seq, n);
    for (std::size_t j = 0; j < d; ++j) {
      seq.tokens.at(n, j) = mean[j] + proc.noise_scale() * rng.normal_at(n * d + j);
    }
  }
  return seq;
}

double variance_reward(const Sequence& seq, std::size_t k) {
  const std::size_t n = seq.length();
  if (n < 2) throw InvalidArgument("variance_reward: needs at least two tokens");
  if (k >= seq.token_dim()) throw InvalidArgument("variance_reward: feature index out of range");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += seq.tokens.at(i, k);
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = seq.tokens.at(i, k) - mean;
    var += r * r;
  }
  return var / static_cast<double>(n);
}

double oracle_nll(const ArProcess& proc, const Sequence& seq) {
  const std::size_t d = proc.token_dim();
  if (seq.token_dim() != d) throw ShapeError("oracle_nll: token width does not match the process");
  if (seq.length() < 1) throw InvalidArgument("oracle_nll: empty sequence");
  const double s2 = proc.noise_scale() * proc.noise_scale();
  const double log_norm = 0.5 * std::log(2.0 * std::numbers::pi * s2);
  double total = 0.0;
  for (std::size_t n = 0; n < seq.length(); ++n) {
    const Tensor mean = proc.conditional_mean(seq, n);
    for (std::size_t j = 0; j < d; ++j) {
      const double r = seq.tokens.at(n, j) - mean[j];
      total += log_norm + 0.5 * r * r / s2;
    }
  }
  return total / static_cast<double>(seq.length());
}

void RewardSpec::validate(std::size_t token_dim) const {
  if (kind == Kind::Variance && feature >= token_dim) {
    throw ConfigError("reward: feature index " + std::to_string(feature) + " out of range");
  }
  if (kind == Kind::OracleNll) {
    if (!process) throw ConfigError("reward: oracle_nll needs a process");
    if (process->token_dim() != token_dim) throw ConfigError("reward: process width mismatch");
  }
}

std::string RewardSpec::describe() const {
  if (kind == Kind::Variance) return "variance:" + std::to_string(feature);
  return "oracle_nll";
}

double reward_of(const RewardSpec& spec, const Sequence& seq) {
  spec.validate(seq.token_dim());
  if (spec.kind == RewardSpec::Kind::Variance) return variance_reward(seq, spec.feature);
  return -oracle_nll(*spec.process, seq);
}

}  // namespace ardpo::rewards

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

#include "ardpo/ardm/pretrain.hpp"

#include "ardpo/error.hpp"
#include "ardpo/schedule/schedule.hpp"

namespace ardpo::ardm {

TokenDraws draw_tokens(const Rng& rng, std::size_t length, std::size_t token_dim,
                       double cond_dropout) {
  TokenDraws draws;
  draws.drop_condition = cond_dropout > 0.0 && rng.uniform_at(0) < cond_dropout;
  const Rng time_rng = rng.split(1);
  const Rng noise_rng = rng.split(2);
  draws.times.resize(length);
  for (std::size_t n = 0; n < length; ++n) draws.times[n] = time_rng.uniform_at(n);
  draws.noise = Tensor::matrix(length, token_dim);
  for (std::size_t i = 0; i < draws.noise.size(); ++i) draws.noise[i] = noise_rng.normal_at(i);
  return draws;
}

namespace {

struct Noised {
  Tensor x_t;
  Tensor target;
};

Noised noise_sequence(const Sequence& seq, const TokenDraws& draws) {
  const schedule::NoiseSchedule sched;
  Noised out{Tensor(seq.tokens.shape()), Tensor(seq.tokens.shape())};
  const std::size_t d = seq.token_dim();
  for (std::size_t n = 0; n < seq.length(); ++n) {
    const auto p = sched.at(draws.times[n]);
    for (std::size_t j = 0; j < d; ++j) {
      const double x0 = seq.tokens.at(n, j);
      const double x1 = draws.noise.at(n, j);
      out.x_t.at(n, j) = p.alpha * x0 + p.sigma * x1;
      out.target.at(n, j) = p.alpha_dot * x0 + p.sigma_dot * x1;
    }
  }
  return out;
}

}  // namespace

LossAndGrad pretrain_loss(const ArdmModel& model, std::span<const Sequence> batch, const Rng& rng) {
  if (batch.empty()) throw InvalidArgument("pretrain_loss: empty batch");
  LossAndGrad out{0.0, model.params().zeros_like()};
  const double d = static_cast<double>(model.arch().token_dim);
  const double b = static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Sequence& seq = batch[i];
    const TokenDraws draws =
        draw_tokens(rng.split(i), seq.length(), seq.token_dim(), model.arch().cond_dropout);
    const Noised noised = noise_sequence(seq, draws);

    Tape tape(model.params());
    const NodeId h =
        model.encode(tape, seq, draws.drop_condition ? Conditioning::Null : Conditioning::Prompt);
    const NodeId v = model.denoise(tape, h, tape.constant(noised.x_t), draws.times);
    const Tensor& pred = tape.value(v);

    const double n = static_cast<double>(seq.length());
    Tensor grad(pred.shape());
    double sum = 0.0;
    for (std::size_t k = 0; k < pred.size(); ++k) {
      const double r = pred[k] - noised.target[k];
      sum += r * r;
      grad[k] = 2.0 * r / (n * d * b);
    }
    out.loss += sum / (n * d * b);
    out.grads.accumulate(tape.backward(v, grad).params);
  }
  return out;
}

double denoising_loss(const VelocityModel& model, std::span<const Sequence> batch, const Rng& rng,
                      double cond_dropout) {
  if (batch.empty()) throw InvalidArgument("denoising_loss: empty batch");
  double loss = 0.0;
  const double b = static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Sequence& seq = batch[i];
    const TokenDraws draws = draw_tokens(rng.split(i), seq.length(), seq.token_dim(), cond_dropout);
    const Noised noised = noise_sequence(seq, draws);
    const Tensor pred = model.velocity(seq, noised.x_t, draws.times,
                                       draws.drop_condition ? Conditioning::Null : Conditioning::Prompt);
    double sum = 0.0;
    for (std::size_t k = 0; k < pred.size(); ++k) {
      const double r = pred[k] - noised.target[k];
      sum += r * r;
    }
    loss += sum / (static_cast<double>(seq.length() * seq.token_dim()) * b);
  }
  return loss;
}

}  // namespace ardpo::ardm

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

#include "ardpo/align/dpo.hpp"

#include <cmath>
#include <memory>

#include "ardpo/error.hpp"
#include "ardpo/schedule/schedule.hpp"

namespace ardpo::align {

namespace {

using ardm::Conditioning;
using netcore::NodeId;
using netcore::Tape;

struct Noised {
  Tensor x_t;
  Tensor target;
};

Noised noise_at(const Sequence& seq, double t, const Rng& noise_rng) {
  const auto p = schedule::NoiseSchedule{}.at(t);
  const Rng rng = noise_rng.split(ardm::sequence_fingerprint(seq));
  Noised out{Tensor(seq.tokens.shape()), Tensor(seq.tokens.shape())};
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    const double x0 = seq.tokens[i];
    const double x1 = rng.normal_at(i);
    out.x_t[i] = p.alpha * x0 + p.sigma * x1;
    out.target[i] = p.alpha_dot * x0 + p.sigma_dot * x1;
  }
  return out;
}

double mean_error(const Tensor& pred, const Tensor& target, std::size_t tokens) {
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = pred[i] - target[i];
    sum += r * r;
  }
  return sum / static_cast<double>(tokens);
}

// Policy forward pass for one sequence; the tape is kept for the backward
// pass, whose seed needs dL/dmargin.
struct PolicyTerm {
  std::unique_ptr<Tape> tape;
  NodeId v = 0;
  double err = 0.0;
};

PolicyTerm policy_forward(const ArdmModel& policy, const Sequence& seq, const Noised& noised,
                          std::span<const double> times) {
  PolicyTerm out;
  out.tape = std::make_unique<Tape>(policy.params());
  const NodeId h = policy.encode(*out.tape, seq, Conditioning::Prompt);
  out.v = policy.denoise(*out.tape, h, out.tape->constant(noised.x_t), times);
  out.err = mean_error(out.tape->value(out.v), noised.target, seq.length());
  return out;
}

ParamSet policy_backward(const PolicyTerm& term, const Noised& noised, double derr) {
  const Tensor& pred = term.tape->value(term.v);
  Tensor seed(pred.shape());
  const double n = static_cast<double>(pred.rows());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    seed[i] = derr * (2.0 * (pred[i] - noised.target[i]) / n);
  }
  return term.tape->backward(term.v, seed).params;
}

}  // namespace

double sigmoid(double m) noexcept {
  if (m >= 0.0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

double softplus_neg(double m) noexcept {
  if (m >= 0.0) return std::log1p(std::exp(-m));
  return -m + std::log1p(std::exp(m));
}

PairLoss dpo_pair_loss(const ArdmModel& policy, const ArdmModel& ref, const PreferencePair& pair,
                       double beta, const Rng& rng, bool d_norm, bool with_grads) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("dpo: beta must be positive");
  if (!(policy.arch() == ref.arch()) || !policy.params().same_layout(ref.params())) {
    throw InvalidArgument("dpo: policy and reference architectures differ");
  }
  if (!ref.params().frozen()) throw InvalidArgument("dpo: reference parameters must be frozen");
  pair.validate();

  const double t = rng.uniform_at(0);
  const Rng noise_rng = rng.split(1);
  const double scale = d_norm ? beta / static_cast<double>(policy.arch().token_dim) : beta;

  const Noised nw = noise_at(pair.winner, t, noise_rng);
  const Noised nl = noise_at(pair.loser, t, noise_rng);
  const std::vector<double> tw(pair.winner.length(), t);
  const std::vector<double> tl(pair.loser.length(), t);

  const double ref_w =
      mean_error(ref.velocity(pair.winner, nw.x_t, tw, Conditioning::Prompt), nw.target,
                 pair.winner.length());
  const double ref_l =
      mean_error(ref.velocity(pair.loser, nl.x_t, tl, Conditioning::Prompt), nl.target,
                 pair.loser.length());

  const PolicyTerm pw = policy_forward(policy, pair.winner, nw, tw);
  const PolicyTerm pl = policy_forward(policy, pair.loser, nl, tl);

  const double margin = scale * ((ref_w - pw.err) - (ref_l - pl.err));
  PairLoss out;
  out.loss = softplus_neg(margin);
  out.diagnostics = {margin, out.loss, pw.err - ref_w, pl.err - ref_l, margin > 0.0 ? 1.0 : 0.0};
  if (!std::isfinite(out.loss)) throw NumericError("dpo: non-finite loss");

  if (with_grads) {
    // dL/dmargin = -sigmoid(-margin); dmargin/derr_theta(w) = -scale, dmargin/derr_theta(l) = +scale.
    const double dl_dm = -sigmoid(-margin);
    out.grads = policy_backward(pw, nw, -scale * dl_dm);
    out.grads.accumulate(policy_backward(pl, nl, scale * dl_dm));
  }
  return out;
}

std::vector<double> beta_preset(std::string_view task) {
  if (task == "task-a") return {200.0, 400.0, 800.0};
  if (task == "task-b") return {800.0, 1600.0, 3200.0};
  throw ConfigError("unknown beta preset '" + std::string(task) + "'");
}

}  // namespace ardpo::align

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

#include "ardpo/align/trainer.hpp"

#include <chrono>
#include <cmath>

#include "ardpo/align/kl.hpp"
#include "ardpo/align/preference.hpp"
#include "ardpo/rewards/rewards.hpp"

namespace ardpo::align {

void DpoConfig::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("dpo: beta must be positive");
  if (batch_pairs == 0 || accumulation == 0) {
    throw ConfigError("dpo: batch_pairs and accumulation must be positive");
  }
  if (eval_interval == 0) throw ConfigError("dpo: eval_interval must be positive");
  if (!(grad_clip >= 0.0)) throw ConfigError("dpo: grad_clip must be non-negative");
  if (!(kl_ceiling >= 0.0)) throw ConfigError("dpo: kl_ceiling must be non-negative");
  optimizer.validate();
}

Evaluation evaluate_policy(const ArdmModel& policy, const ArdmModel& ref, const EvalConfig& eval) {
  const auto seqs = sample_candidates(policy, eval.sampling, 0, eval.rng);
  std::vector<double> values;
  values.reserve(seqs.size());
  for (const auto& s : seqs) values.push_back(rewards::reward_of(eval.reward, s));
  Evaluation out;
  out.reward = reward_stats(std::move(values));
  out.kl = kl_metric(policy, ref, seqs, eval.rng.split(2), eval.kl_samples_per_token);
  return out;
}

ArdmModel DpoResult::selected_model() const {
  if (checkpoints.empty()) return model;
  return ArdmModel(model.arch(), checkpoints.at(selected).params);
}

namespace {

struct Window {
  double delta_plus = 0.0;
  double delta_minus = 0.0;
  std::vector<double> margins;

  void add(const DpoDiagnostics& d) {
    delta_plus += d.delta_plus;
    delta_minus += d.delta_minus;
    margins.push_back(d.margin);
  }
  void fill(MetricsRecord& rec) const {
    if (margins.empty()) return;
    const double n = static_cast<double>(margins.size());
    rec.delta_plus = delta_plus / n;
    rec.delta_minus = delta_minus / n;
    rec.margin_accuracy = bradley_terry_check(margins).accuracy;
  }
};

}  // namespace

DpoResult dpo_train(const ArdmModel& initial, const ArdmModel& ref, const prefdata::PairStore& store,
                    const DpoConfig& cfg, const EvalConfig& eval, const Rng& rng,
                    const CheckpointSink& sink) {
  cfg.validate();
  if (store.pairs.empty()) throw InvalidArgument("dpo: pair store is empty");
  DpoResult result{ArdmModel(initial.arch(), initial.params().thawed_copy()), {}, {}, 0};
  if (cfg.max_steps == 0) return result;

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  ArdmModel& policy = result.model;
  netcore::AdamWState state = netcore::AdamWState::init(policy.params(), cfg.optimizer);
  const std::size_t per_step = cfg.effective_batch();
  const double inv_batch = 1.0 / static_cast<double>(per_step);

  Window window;
  MetricsRecord pending_base;
  double base_reward = 0.0;
  std::size_t last_good = 0;

  auto record = [&](std::size_t step, const Window& w) {
    const Evaluation ev = evaluate_policy(policy, ref, eval);
    MetricsRecord rec{step, ev.reward.mean, ev.reward.std_error, ev.kl, 0.0, 0.0, 0.0, elapsed()};
    w.fill(rec);
    result.metrics.push_back(rec);
    result.checkpoints.push_back({step, policy.params().frozen_copy()});
    if (sink) sink(result.checkpoints.back(), rec);
    return rec;
  };

  for (std::size_t step = 1; step <= cfg.max_steps; ++step) {
    const Rng step_rng = rng.split(step);
    ParamSet grads = policy.params().zeros_like();
    Window batch_window;
    for (std::size_t j = 0; j < per_step; ++j) {
      const Rng pair_rng = step_rng.split(j);
      const auto& pair = store.pairs[pair_rng.bits_at(0) % store.pairs.size()];
      PairLoss pl;
      try {
        pl = dpo_pair_loss(policy, ref, pair, cfg.beta, pair_rng.split(1), cfg.d_norm);
      } catch (const NumericError& e) {
        throw TrainingAborted(std::string("dpo: ") + e.what() + " at step " + std::to_string(step) +
                                  "; last good checkpoint is step " + std::to_string(last_good),
                              last_good);
      }
      grads.accumulate(pl.grads, inv_batch);
      batch_window.add(pl.diagnostics);
    }
    if (step == 1) {
      pending_base = record(0, batch_window);
      base_reward = pending_base.reward;
    }
    for (std::size_t k = 0; k < batch_window.margins.size(); ++k) {
      window.margins.push_back(batch_window.margins[k]);
    }
    window.delta_plus += batch_window.delta_plus;
    window.delta_minus += batch_window.delta_minus;

    if (cfg.grad_clip > 0.0) {
      const double norm = std::sqrt(grads.squared_norm());
      if (norm > cfg.grad_clip) grads.scale(cfg.grad_clip / norm);
    }
    try {
      netcore::adamw_step(policy.mutable_params(), grads, state);
    } catch (const NumericError& e) {
      throw TrainingAborted(std::string("dpo: ") + e.what() + " at step " + std::to_string(step) +
                                "; last good checkpoint is step " + std::to_string(last_good),
                            last_good);
    }

    if (step % cfg.eval_interval == 0 || step == cfg.max_steps) {
      record(step, window);
      window = {};
      last_good = step;
    }
  }

  // Early stopping: best reward among checkpoints that beat the base model
  // within the KL ceiling; the base checkpoint otherwise.
  double best = -INFINITY;
  for (std::size_t i = 1; i < result.metrics.size(); ++i) {
    const MetricsRecord& m = result.metrics[i];
    if (m.reward > base_reward && m.kl <= cfg.kl_ceiling && m.reward > best) {
      best = m.reward;
      result.selected = i;
    }
  }
  return result;
}

}  // namespace ardpo::align

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

#include "ardpo/align/preference.hpp"

#include <algorithm>
#include <cmath>

#include "ardpo/align/dpo.hpp"
#include "ardpo/error.hpp"

namespace ardpo::align {

PreferenceAccuracy bradley_terry_check(std::span<const double> margins) {
  if (margins.empty()) throw InvalidArgument("bradley_terry_check: no margins");
  PreferenceAccuracy out;
  double prob = 0.0;
  std::size_t positive = 0;
  bool all_zero = true;
  for (double m : margins) {
    prob += sigmoid(m);
    if (m > 0.0) ++positive;
    if (m != 0.0) all_zero = false;
  }
  const double n = static_cast<double>(margins.size());
  out.implied_probability = prob / n;
  out.accuracy = static_cast<double>(positive) / n;
  out.degenerate = all_zero;
  return out;
}

std::vector<double> fit_bradley_terry(std::size_t items, std::span<const Comparison> comparisons,
                                      std::size_t max_iterations, double tolerance) {
  if (items < 2) throw InvalidArgument("fit_bradley_terry: need at least two items");
  std::vector<double> wins(items, 0.0);
  std::vector<std::vector<double>> games(items, std::vector<double>(items, 0.0));
  for (const Comparison& c : comparisons) {
    if (c.winner >= items || c.loser >= items || c.winner == c.loser) {
      throw InvalidArgument("fit_bradley_terry: bad comparison");
    }
    wins[c.winner] += 1.0;
    games[c.winner][c.loser] += 1.0;
    games[c.loser][c.winner] += 1.0;
  }
  for (std::size_t i = 0; i < items; ++i) {
    if (wins[i] == 0.0) throw InvalidArgument("fit_bradley_terry: an item never wins; MLE diverges");
  }

  std::vector<double> p(items, 1.0);
  std::vector<double> next(items);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    for (std::size_t i = 0; i < items; ++i) {
      double denom = 0.0;
      for (std::size_t j = 0; j < items; ++j) {
        if (j != i && games[i][j] > 0.0) denom += games[i][j] / (p[i] + p[j]);
      }
      next[i] = wins[i] / denom;
    }
    const double anchor = next[0];
    double change = 0.0;
    for (std::size_t i = 0; i < items; ++i) {
      next[i] /= anchor;
      change = std::max(change, std::abs(std::log(next[i]) - std::log(p[i])));
    }
    p.swap(next);
    if (change < tolerance) break;
  }
  std::vector<double> scores(items);
  for (std::size_t i = 0; i < items; ++i) scores[i] = std::log(p[i]);
  return scores;
}

std::vector<double> optimal_policy(std::span<const double> reference, std::span<const double> reward,
                                   double beta) {
  if (reference.size() != reward.size() || reference.empty()) {
    throw InvalidArgument("optimal_policy: size mismatch");
  }
  if (!(beta > 0.0)) throw InvalidArgument("optimal_policy: beta must be positive");
  const double peak = *std::max_element(reward.begin(), reward.end());
  std::vector<double> pi(reference.size());
  double z = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    pi[i] = reference[i] * std::exp((reward[i] - peak) / beta);
    z += pi[i];
  }
  for (double& v : pi) v /= z;
  return pi;
}

std::vector<double> implicit_reward(std::span<const double> policy,
                                    std::span<const double> reference, double beta) {
  if (policy.size() != reference.size()) throw InvalidArgument("implicit_reward: size mismatch");
  std::vector<double> r(policy.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = beta * std::log(policy[i] / reference[i]);
  return r;
}

}  // namespace ardpo::align

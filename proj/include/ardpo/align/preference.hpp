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
#include <span>
#include <vector>

namespace ardpo::align {

struct PreferenceAccuracy {
  double implied_probability = 0.5;  // mean sigmoid(margin)
  double accuracy = 0.0;             // fraction with margin > 0
  bool degenerate = false;           // every margin is exactly zero
};

PreferenceAccuracy bradley_terry_check(std::span<const double> margins);

struct Comparison {
  std::size_t winner = 0;
  std::size_t loser = 0;
};

// Maximum-likelihood Bradley-Terry scores (minorize-maximize iterations),
// anchored so that score[0] = 0. P(i beats j) = sigmoid(score_i - score_j).
std::vector<double> fit_bradley_terry(std::size_t items, std::span<const Comparison> comparisons,
                                      std::size_t max_iterations = 10000, double tolerance = 1e-12);

// Closed-form optimum of the KL-regularized objective over a finite support:
// pi(x) = mu(x) exp(r(x) / beta) / Z.
std::vector<double> optimal_policy(std::span<const double> reference, std::span<const double> reward,
                                   double beta);

// beta * log(pi / mu); equals r - beta log Z for the optimal policy.
std::vector<double> implicit_reward(std::span<const double> policy,
                                    std::span<const double> reference, double beta);

}  // namespace ardpo::align

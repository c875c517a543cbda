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

#include "ardpo/align/kl.hpp"

#include <algorithm>
#include <vector>

#include "ardpo/ardm/pretrain.hpp"
#include "ardpo/error.hpp"

namespace ardpo::align {

double kl_metric(const ardm::VelocityModel& policy, const ardm::VelocityModel& ref,
                 std::span<const ardm::Sequence> sequences, const netcore::Rng& rng,
                 std::size_t samples_per_token) {
  if (sequences.empty()) throw InvalidArgument("kl_metric: no sequences");
  if (samples_per_token == 0) throw InvalidArgument("kl_metric: samples_per_token must be positive");
  std::vector<double> per_sequence;
  per_sequence.reserve(sequences.size());
  for (const ardm::Sequence& seq : sequences) {
    const netcore::Rng seq_rng = rng.split(ardm::sequence_fingerprint(seq));
    double total = 0.0;
    for (std::size_t s = 0; s < samples_per_token; ++s) {
      const ardm::TokenDraws draws =
          ardm::draw_tokens(seq_rng.split(s), seq.length(), seq.token_dim(), 0.0);
      netcore::Tensor x_t(seq.tokens.shape());
      for (std::size_t n = 0; n < seq.length(); ++n) {
        const double t = draws.times[n];
        for (std::size_t j = 0; j < seq.token_dim(); ++j) {
          x_t.at(n, j) = (1.0 - t) * seq.tokens.at(n, j) + t * draws.noise.at(n, j);
        }
      }
      const netcore::Tensor a = policy.velocity(seq, x_t, draws.times, ardm::Conditioning::Prompt);
      const netcore::Tensor b = ref.velocity(seq, x_t, draws.times, ardm::Conditioning::Prompt);
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double g = a[i] - b[i];
        total += g * g;
      }
    }
    per_sequence.push_back(total / static_cast<double>(samples_per_token * seq.tokens.size()));
  }
  // Sorting makes the floating-point reduction itself order independent.
  std::sort(per_sequence.begin(), per_sequence.end());
  double sum = 0.0;
  for (double v : per_sequence) sum += v;
  return sum / static_cast<double>(per_sequence.size());
}

}  // namespace ardpo::align

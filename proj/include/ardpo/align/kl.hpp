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

#include <span>

#include "ardpo/ardm/model.hpp"

namespace ardpo::align {

// Token-average velocity gap between two models on sequences sampled from the
// policy: d^-1 * mean over sequences, tokens, t ~ U(0, 1) and x_t ~ q(.|x0) of
// ||v_policy - v_ref||^2, with samples_per_token draws per token. Draws are
// keyed by sequence content, so the value does not depend on the order of
// the sequences.
double kl_metric(const ardm::VelocityModel& policy, const ardm::VelocityModel& ref,
                 std::span<const ardm::Sequence> sequences, const netcore::Rng& rng,
                 std::size_t samples_per_token = 1);

}  // namespace ardpo::align

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

#include <cstdint>
#include <vector>

#include "ardpo/netcore/tensor.hpp"

namespace ardpo::netcore {

// Counter-based generator: every draw is a pure function of
// (seed, stream, index), so draws can be taken in any order and streams can
// be split off deterministically (per sequence, per token, ...).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t position() const noexcept { return counter_; }

  // Stateless access by draw index.
  std::uint64_t bits_at(std::uint64_t index) const noexcept;
  // Uniform on the open interval (0, 1).
  double uniform_at(std::uint64_t index) const noexcept;
  double normal_at(std::uint64_t index) const noexcept;

  // Sequential access; advances the draw index.
  std::uint64_t next_bits() noexcept { return bits_at(counter_++); }
  double next_uniform() noexcept { return uniform_at(counter_++); }
  double next_normal() noexcept { return normal_at(counter_++); }
  std::size_t next_below(std::size_t n) noexcept;

  // Child generator on a derived stream; independent of the parent's position.
  Rng split(std::uint64_t child) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

// I.i.d. standard normal tensor; consumes size() sequential draws.
Tensor gaussian(Rng& rng, std::vector<std::size_t> shape);

}  // namespace ardpo::netcore

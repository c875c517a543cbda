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

#include "ardpo/netcore/rng.hpp"

#include <cmath>
#include <numbers>

namespace ardpo::netcore {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) noexcept
    : seed_(seed), stream_(stream), key_(mix64(mix64(seed + kGolden) ^ mix64(~stream * kGolden))) {}

std::uint64_t Rng::bits_at(std::uint64_t index) const noexcept {
  // Two rounds so that neighbouring keys do not produce shifted copies.
  return mix64(mix64(key_ + index * kGolden) ^ key_);
}

double Rng::uniform_at(std::uint64_t index) const noexcept {
  // 53 random bits, offset by half an ulp so that 0 is never returned.
  return (static_cast<double>(bits_at(index) >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal_at(std::uint64_t index) const noexcept {
  // Box-Muller over two sub-draws of this index.
  const std::uint64_t base = mix64(key_ ^ (index * kGolden + 0x632BE59BD9B4E019ULL));
  const double u1 = (static_cast<double>(mix64(base) >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = (static_cast<double>(mix64(base + kGolden) >> 11) + 0.5) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::next_below(std::size_t n) noexcept {
  return static_cast<std::size_t>(next_uniform() * static_cast<double>(n)) % n;
}

Rng Rng::split(std::uint64_t child) const noexcept {
  return Rng(seed_, mix64(stream_ * kGolden + mix64(child + 1)));
}

Tensor gaussian(Rng& rng, std::vector<std::size_t> shape) {
  Tensor out(std::move(shape));
  for (double& v : out.data()) v = rng.next_normal();
  return out;
}

}  // namespace ardpo::netcore

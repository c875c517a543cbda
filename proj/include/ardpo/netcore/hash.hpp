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
#include <span>
#include <string>
#include <string_view>

#include "ardpo/netcore/param_set.hpp"

namespace ardpo::netcore {

// 64-bit FNV-1a; stable across platforms and runs.
class Fnv1a {
 public:
  Fnv1a& bytes(std::span<const unsigned char> data) noexcept;
  Fnv1a& text(std::string_view s) noexcept;
  Fnv1a& u64(std::uint64_t v) noexcept;
  Fnv1a& f64(double v) noexcept;
  std::uint64_t value() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

// Hash of parameter paths, shapes and exact values.
std::string param_fingerprint(const ParamSet& params);

}  // namespace ardpo::netcore

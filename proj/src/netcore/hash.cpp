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

#include "ardpo/netcore/hash.hpp"

#include <bit>
#include <cstdio>

namespace ardpo::netcore {

Fnv1a& Fnv1a::bytes(std::span<const unsigned char> data) noexcept {
  for (unsigned char c : data) {
    state_ ^= c;
    state_ *= 0x100000001b3ULL;
  }
  return *this;
}

Fnv1a& Fnv1a::text(std::string_view s) noexcept {
  bytes({reinterpret_cast<const unsigned char*>(s.data()), s.size()});
  return u64(s.size());
}

Fnv1a& Fnv1a::u64(std::uint64_t v) noexcept {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  return bytes(b);
}

Fnv1a& Fnv1a::f64(double v) noexcept { return u64(std::bit_cast<std::uint64_t>(v)); }

std::string Fnv1a::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
  return buf;
}

std::string param_fingerprint(const ParamSet& params) {
  Fnv1a h;
  for (const auto& [path, t] : params) {
    h.text(path);
    for (std::size_t e : t.shape()) h.u64(e);
    for (double v : t.data()) h.f64(v);
  }
  return h.hex();
}

}  // namespace ardpo::netcore

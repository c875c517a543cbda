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

#include "ardpo/netcore/param_set.hpp"

#include <algorithm>
#include <cmath>

#include "ardpo/error.hpp"

namespace ardpo::netcore {

void ParamSet::require_mutable(std::string_view what) const {
  if (frozen_) throw FrozenError("cannot mutate frozen parameter set (" + std::string(what) + ")");
}

void ParamSet::add(const std::string& path, Tensor value) {
  require_mutable(path);
  if (!entries_.emplace(path, std::move(value)).second) {
    throw InvalidArgument("duplicate parameter path: " + path);
  }
  ++version_;
}

const Tensor& ParamSet::at(std::string_view path) const {
  auto it = entries_.find(path);
  if (it == entries_.end()) throw InvalidArgument("unknown parameter path: " + std::string(path));
  return it->second;
}

Tensor& ParamSet::mutable_at(std::string_view path) {
  require_mutable(path);
  auto it = entries_.find(path);
  if (it == entries_.end()) throw InvalidArgument("unknown parameter path: " + std::string(path));
  ++version_;
  return it->second;
}

std::size_t ParamSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [_, t] : entries_) n += t.size();
  return n;
}

ParamSet ParamSet::frozen_copy() const {
  ParamSet out = thawed_copy();
  out.frozen_ = true;
  return out;
}

ParamSet ParamSet::thawed_copy() const {
  ParamSet out;
  out.entries_ = entries_;
  return out;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& [path, t] : entries_) out.entries_.emplace(path, Tensor(t.shape()));
  return out;
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  return std::equal(entries_.begin(), entries_.end(), other.entries_.begin(),
                    [](const auto& a, const auto& b) {
                      return a.first == b.first && a.second.shape() == b.second.shape();
                    });
}

void ParamSet::accumulate(const ParamSet& other, double scale) {
  require_mutable("accumulate");
  if (!same_layout(other)) throw ShapeError("accumulate: parameter layouts differ");
  auto it = other.entries_.begin();
  for (auto& [path, t] : entries_) {
    auto dst = t.data();
    auto src = it->second.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
    ++it;
  }
  ++version_;
}

void ParamSet::scale(double factor) {
  require_mutable("scale");
  for (auto& [_, t] : entries_) {
    for (double& v : t.data()) v *= factor;
  }
  ++version_;
}

double ParamSet::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& [_, t] : entries_) {
    for (double v : t.data()) m = std::max(m, std::abs(v));
  }
  return m;
}

double ParamSet::squared_norm() const noexcept {
  double s = 0.0;
  for (const auto& [_, t] : entries_) {
    for (double v : t.data()) s += v * v;
  }
  return s;
}

}  // namespace ardpo::netcore

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
#include <map>
#include <string>

#include "ardpo/netcore/tensor.hpp"

namespace ardpo::netcore {

// Named parameter tensors, iterated in sorted path order. The version
// counter advances on every mutable access, which lets tapes detect that
// the parameters they were recorded against have changed.
class ParamSet {
 public:
  using Map = std::map<std::string, Tensor, std::less<>>;

  void add(const std::string& path, Tensor value);

  bool contains(std::string_view path) const { return entries_.find(path) != entries_.end(); }
  const Tensor& at(std::string_view path) const;
  Tensor& mutable_at(std::string_view path);

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t scalar_count() const noexcept;
  Map::const_iterator begin() const noexcept { return entries_.begin(); }
  Map::const_iterator end() const noexcept { return entries_.end(); }

  std::uint64_t version() const noexcept { return version_; }
  bool frozen() const noexcept { return frozen_; }
  void freeze() noexcept { frozen_ = true; }

  // Deep copy that rejects mutation.
  ParamSet frozen_copy() const;
  // Mutable deep copy.
  ParamSet thawed_copy() const;
  ParamSet zeros_like() const;

  bool same_layout(const ParamSet& other) const;
  // this += scale * other; layouts must match.
  void accumulate(const ParamSet& other, double scale = 1.0);
  void scale(double factor);
  double max_abs() const noexcept;
  double squared_norm() const noexcept;

  friend bool operator==(const ParamSet& a, const ParamSet& b) noexcept {
    return a.entries_ == b.entries_;
  }

 private:
  void require_mutable(std::string_view what) const;

  Map entries_;
  std::uint64_t version_ = 0;
  bool frozen_ = false;
};

}  // namespace ardpo::netcore

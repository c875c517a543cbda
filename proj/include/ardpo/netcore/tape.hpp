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
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ardpo/netcore/param_set.hpp"
#include "ardpo/netcore/tensor.hpp"

namespace ardpo::netcore {

using NodeId = std::size_t;

struct TapeOptions {
  // Raise NumericError (naming the layer path) as soon as a primitive
  // produces a NaN or Inf.
  bool check_finite = true;
};

class Gradients {
 public:
  ParamSet params;

  // Gradient reaching an input() node (zeros when it was not reached).
  const Tensor& node(NodeId id) const { return nodes_.at(id); }

 private:
  friend class Tape;
  std::vector<Tensor> nodes_;
};

// Activation record for one forward evaluation over a fixed layer
// vocabulary: affine, SiLU, layer-norm, single-head causal attention,
// sinusoidal time embedding, column concatenation and mean-pool, plus the
// residual add used inside blocks. Layers read their parameters from the
// bound ParamSet by path prefix, e.g. affine(x, "head.fc0") reads
// "head.fc0.w" (in x out) and "head.fc0.b".
class Tape {
 public:
  explicit Tape(const ParamSet& params, TapeOptions options = {});

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  NodeId constant(Tensor value);
  // Leaf whose gradient is reported by backward().
  NodeId input(Tensor value);
  NodeId parameter(std::string_view path);

  NodeId affine(NodeId x, std::string_view layer);
  NodeId silu(NodeId x, std::string_view layer);
  NodeId layer_norm(NodeId x, std::string_view layer);
  // Reads "<layer>.wq", "<layer>.wk", "<layer>.wv"; row i attends to rows <= i.
  NodeId causal_attention(NodeId x, std::string_view layer);
  NodeId time_embedding(std::span<const double> times, std::size_t dim);
  // Concatenates along columns; single-row inputs broadcast to the row count
  // of the others.
  NodeId concat(std::initializer_list<NodeId> parts, std::string_view layer);
  NodeId mean_pool(NodeId x, std::string_view layer);
  NodeId add(NodeId a, NodeId b, std::string_view layer);

  const Tensor& value(NodeId id) const;
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::uint64_t params_version() const noexcept { return version_; }
  const ParamSet& params() const noexcept { return *params_; }

  // Reverse sweep from `output` seeded with `output_grad`. Throws
  // StaleTapeError if the bound parameters changed since recording.
  Gradients backward(NodeId output, const Tensor& output_grad) const;

 private:
  enum class Op { Constant, Input, Parameter, Affine, Silu, LayerNorm, Attention, TimeEmbed,
                  Concat, MeanPool, Add };

  struct Node {
    Op op;
    std::string path;
    std::vector<NodeId> inputs;
    Tensor value;
    const Tensor* ref = nullptr;
    std::vector<Tensor> saved;
  };

  NodeId push(Node node);
  void check(const Node& node) const;
  const Node& node(NodeId id) const;

  const ParamSet* params_;
  std::uint64_t version_;
  TapeOptions options_;
  std::vector<Node> nodes_;
  std::map<std::string, NodeId, std::less<>> param_nodes_;
};

}  // namespace ardpo::netcore

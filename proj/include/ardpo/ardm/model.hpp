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
#include <vector>

#include "ardpo/netcore/param_set.hpp"
#include "ardpo/netcore/rng.hpp"
#include "ardpo/netcore/tape.hpp"
#include "ardpo/netcore/tensor.hpp"

namespace ardpo::ardm {

using netcore::NodeId;
using netcore::ParamSet;
using netcore::Rng;
using netcore::Tape;
using netcore::Tensor;

// A prompt vector plus N continuous tokens stored as an N x d matrix.
struct Sequence {
  Tensor prompt;
  Tensor tokens;

  std::size_t length() const noexcept { return tokens.rows(); }
  std::size_t token_dim() const noexcept { return tokens.cols(); }
};

struct ArdmArch {
  std::size_t token_dim = 2;
  std::size_t prompt_dim = 2;
  std::size_t hidden = 64;
  std::size_t encoder_depth = 2;
  std::size_t head_depth = 3;
  std::size_t time_dim = 16;
  std::size_t position_dim = 8;
  std::size_t max_tokens = 16;
  double cond_dropout = 0.1;

  void validate() const;
  friend bool operator==(const ArdmArch&, const ArdmArch&) = default;
};

enum class Conditioning { Prompt, Null };

// Validates a sequence against an architecture (length, widths, finiteness).
void validate_sequence(const ArdmArch& arch, const Sequence& seq);

// Teacher-forced velocity prediction for all tokens of a sequence at once:
// row n of the result is v(x_t[n], x0_{<n}) at time times[n].
class VelocityModel {
 public:
  virtual ~VelocityModel() = default;
  virtual Tensor velocity(const Sequence& seq, const Tensor& x_t, std::span<const double> times,
                          Conditioning cond) const = 0;
};

// Causal context encoder + per-token v-prediction head.
//
// Encoder input row n is concat(x0_{n-1}, prompt-or-null, position(n)) with a
// zero token for n = 1, so after causal attention h_n sees only (c, x0_{<n}).
// Each encoder block is  y = z + attn(z);  z' = layer_norm(y + silu(affine(y))).
// The head is an MLP over concat(h_n, x_t[n], time_embedding(t_n)).
class ArdmModel : public VelocityModel {
 public:
  ArdmModel() = default;
  ArdmModel(ArdmArch arch, ParamSet params);

  static ArdmModel init(const ArdmArch& arch, Rng rng);
  static ParamSet init_params(const ArdmArch& arch, Rng rng);

  const ArdmArch& arch() const noexcept { return arch_; }
  const ParamSet& params() const noexcept { return params_; }
  ParamSet& mutable_params() noexcept { return params_; }

  // Frozen deep copy (reference model).
  ArdmModel frozen_copy() const;

  // h_{1..N} for the whole sequence in one causal pass.
  NodeId encode(Tape& tape, const Sequence& seq, Conditioning cond) const;
  // v-prediction for rows of x_t given the matching context rows.
  NodeId denoise(Tape& tape, NodeId context, NodeId x_t, std::span<const double> times) const;

  Tensor velocity(const Sequence& seq, const Tensor& x_t, std::span<const double> times,
                  Conditioning cond) const override;

 private:
  ArdmArch arch_;
  ParamSet params_;
};

std::string encoder_block(std::size_t i);
std::string head_layer(std::size_t i);

// Content hash of prompt and tokens; keys per-sequence Monte-Carlo draws so
// that they follow the sequence rather than its position in a batch.
std::uint64_t sequence_fingerprint(const Sequence& seq);

// Sinusoidal position code for 1-based token index n.
double position_phase(const ArdmArch& arch, std::size_t n);

}  // namespace ardpo::ardm

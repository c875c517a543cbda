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

#include "ardpo/ardm/model.hpp"

#include <cmath>

#include "ardpo/error.hpp"
#include "ardpo/netcore/hash.hpp"

namespace ardpo::ardm {

void ArdmArch::validate() const {
  if (token_dim == 0 || prompt_dim == 0 || hidden == 0) {
    throw ConfigError("model: token_dim, prompt_dim and hidden must be positive");
  }
  if (encoder_depth == 0) throw ConfigError("model: encoder_depth must be at least 1");
  if (head_depth < 2) throw ConfigError("model: head_depth must be at least 2");
  if (time_dim == 0 || time_dim % 2 || position_dim == 0 || position_dim % 2) {
    throw ConfigError("model: time_dim and position_dim must be even and positive");
  }
  if (max_tokens == 0) throw ConfigError("model: max_tokens must be positive");
  if (!(cond_dropout >= 0.0 && cond_dropout < 1.0)) {
    throw ConfigError("model: cond_dropout must lie in [0, 1)");
  }
}

void validate_sequence(const ArdmArch& arch, const Sequence& seq) {
  const std::size_t n = seq.length();
  if (n < 1 || n > arch.max_tokens) {
    throw InvalidArgument("sequence length " + std::to_string(n) + " outside [1, " +
                          std::to_string(arch.max_tokens) + "]");
  }
  if (seq.tokens.rank() != 2 || seq.token_dim() != arch.token_dim) {
    throw ShapeError("sequence tokens " + netcore::shape_string(seq.tokens.shape()) +
                     " do not have token width " + std::to_string(arch.token_dim));
  }
  seq.tokens.require_finite("sequence tokens");
}

std::string encoder_block(std::size_t i) { return "enc.block" + std::to_string(i); }
std::string head_layer(std::size_t i) { return "head.fc" + std::to_string(i); }

std::uint64_t sequence_fingerprint(const Sequence& seq) {
  netcore::Fnv1a h;
  h.u64(seq.prompt.size());
  for (double v : seq.prompt.data()) h.f64(v);
  h.u64(seq.tokens.rows()).u64(seq.tokens.cols());
  for (double v : seq.tokens.data()) h.f64(v);
  return h.value();
}

double position_phase(const ArdmArch& arch, std::size_t n) {
  return static_cast<double>(n) / static_cast<double>(arch.max_tokens);
}

ArdmModel::ArdmModel(ArdmArch arch, ParamSet params) : arch_(arch), params_(std::move(params)) {
  arch_.validate();
  const ParamSet expected = init_params(arch_, Rng(0));
  if (!expected.same_layout(params_)) {
    throw ShapeError("parameter layout does not match the model architecture");
  }
}

ParamSet ArdmModel::init_params(const ArdmArch& arch, Rng rng) {
  arch.validate();
  ParamSet p;
  std::uint64_t stream = 0;
  auto dense = [&](const std::string& name, std::size_t in, std::size_t out, double gain) {
    Rng r = rng.split(stream++);
    Tensor w = netcore::gaussian(r, {in, out});
    const double scale = gain / std::sqrt(static_cast<double>(in));
    for (double& v : w.data()) v *= scale;
    p.add(name + ".w", std::move(w));
    p.add(name + ".b", Tensor::vector(out));
  };
  auto matrix = [&](const std::string& name, std::size_t in, std::size_t out) {
    Rng r = rng.split(stream++);
    Tensor w = netcore::gaussian(r, {in, out});
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& v : w.data()) v *= scale;
    p.add(name, std::move(w));
  };

  const std::size_t h = arch.hidden;
  dense("enc.in", arch.token_dim + arch.prompt_dim + arch.position_dim, h, 1.0);
  {
    Rng r = rng.split(stream++);
    p.add("enc.null", netcore::gaussian(r, {arch.prompt_dim}));
  }
  for (std::size_t b = 0; b < arch.encoder_depth; ++b) {
    const std::string block = encoder_block(b);
    matrix(block + ".attn.wq", h, h);
    matrix(block + ".attn.wk", h, h);
    matrix(block + ".attn.wv", h, h);
    dense(block + ".ff", h, h, 1.0);
    p.add(block + ".ln.gamma", Tensor::vector(h, 1.0));
    p.add(block + ".ln.beta", Tensor::vector(h, 0.0));
  }
  for (std::size_t l = 0; l < arch.head_depth; ++l) {
    const std::size_t in = l == 0 ? h + arch.token_dim + arch.time_dim : h;
    const std::size_t out = l + 1 == arch.head_depth ? arch.token_dim : h;
    dense(head_layer(l), in, out, l + 1 == arch.head_depth ? 0.1 : 1.0);
  }
  return p;
}

ArdmModel ArdmModel::init(const ArdmArch& arch, Rng rng) {
  return ArdmModel(arch, init_params(arch, rng));
}

ArdmModel ArdmModel::frozen_copy() const { return ArdmModel(arch_, params_.frozen_copy()); }

NodeId ArdmModel::encode(Tape& tape, const Sequence& seq, Conditioning cond) const {
  validate_sequence(arch_, seq);
  const std::size_t n = seq.length();
  const std::size_t d = arch_.token_dim;

  Tensor previous = Tensor::matrix(n, d);
  for (std::size_t r = 1; r < n; ++r) {
    const auto src = seq.tokens.row(r - 1);
    std::copy(src.begin(), src.end(), previous.row(r).begin());
  }
  NodeId condition;
  if (cond == Conditioning::Null) {
    condition = tape.parameter("enc.null");
  } else {
    if (seq.prompt.size() != arch_.prompt_dim) {
      throw InvalidArgument("prompt has " + std::to_string(seq.prompt.size()) +
                            " entries but the model expects " + std::to_string(arch_.prompt_dim));
    }
    condition = tape.constant(Tensor({1, arch_.prompt_dim}, seq.prompt.storage()));
  }
  std::vector<double> positions(n);
  for (std::size_t r = 0; r < n; ++r) positions[r] = position_phase(arch_, r + 1);

  const NodeId prev = tape.constant(std::move(previous));
  const NodeId pos = tape.time_embedding(positions, arch_.position_dim);
  NodeId z = tape.affine(tape.concat({prev, condition, pos}, "enc.in"), "enc.in");
  for (std::size_t b = 0; b < arch_.encoder_depth; ++b) {
    const std::string block = encoder_block(b);
    const NodeId y = tape.add(z, tape.causal_attention(z, block + ".attn"), block + ".res0");
    const NodeId f = tape.silu(tape.affine(y, block + ".ff"), block + ".ff");
    z = tape.layer_norm(tape.add(y, f, block + ".res1"), block + ".ln");
  }
  return z;
}

NodeId ArdmModel::denoise(Tape& tape, NodeId context, NodeId x_t,
                          std::span<const double> times) const {
  for (double t : times) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("denoise: time outside [0, 1]");
  }
  NodeId a = tape.concat({context, x_t, tape.time_embedding(times, arch_.time_dim)}, "head.in");
  for (std::size_t l = 0; l < arch_.head_depth; ++l) {
    const std::string layer = head_layer(l);
    a = tape.affine(a, layer);
    if (l + 1 < arch_.head_depth) a = tape.silu(a, layer);
  }
  return a;
}

Tensor ArdmModel::velocity(const Sequence& seq, const Tensor& x_t, std::span<const double> times,
                           Conditioning cond) const {
  if (x_t.rows() != seq.length() || x_t.cols() != arch_.token_dim || times.size() != seq.length()) {
    throw ShapeError("velocity: noisy tokens / times do not match the sequence");
  }
  Tape tape(params_);
  const NodeId h = encode(tape, seq, cond);
  const NodeId v = denoise(tape, h, tape.constant(x_t), times);
  return tape.value(v);
}

}  // namespace ardpo::ardm

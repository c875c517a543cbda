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

#include "ardpo/ardm/sampler.hpp"

#include <cmath>

#include "ardpo/error.hpp"
#include "ardpo/netcore/kernels.hpp"

namespace ardpo::ardm {

namespace kernels = netcore::kernels;
using netcore::RowMatrix;

namespace {

class CachedState : public DenoiserState {
 public:
  CachedState(const ArdmModel& model, std::span<const Tensor> prompts)
      : model_(model), arch_(model.arch()), batch_(prompts.size()) {
    prompts_ = RowMatrix(static_cast<Eigen::Index>(batch_), static_cast<Eigen::Index>(arch_.prompt_dim));
    for (std::size_t i = 0; i < batch_; ++i) {
      if (prompts[i].size() != arch_.prompt_dim) {
        throw InvalidArgument("sampler: prompt " + std::to_string(i) + " has wrong width");
      }
      for (std::size_t j = 0; j < arch_.prompt_dim; ++j) {
        prompts_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = prompts[i][j];
      }
    }
    previous_ = RowMatrix::Zero(static_cast<Eigen::Index>(batch_),
                                static_cast<Eigen::Index>(arch_.token_dim));
    for (Branch& b : branches_) b.blocks.resize(arch_.encoder_depth);
  }

  Tensor velocity(const Tensor& x_t, double t, Conditioning cond) override {
    if (x_t.rows() != batch_ || x_t.cols() != arch_.token_dim) {
      throw ShapeError("sampler: noisy token batch has wrong shape");
    }
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("sampler: time outside [0, 1]");
    const RowMatrix& h = context(cond);
    const auto rows = static_cast<Eigen::Index>(batch_);
    RowMatrix in(rows, static_cast<Eigen::Index>(arch_.hidden + arch_.token_dim + arch_.time_dim));
    in.leftCols(static_cast<Eigen::Index>(arch_.hidden)) = h;
    in.middleCols(static_cast<Eigen::Index>(arch_.hidden), static_cast<Eigen::Index>(arch_.token_dim)) =
        x_t.mat();
    std::vector<double> temb(arch_.time_dim);
    kernels::time_embedding(t, temb);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (std::size_t k = 0; k < arch_.time_dim; ++k) {
        in(r, static_cast<Eigen::Index>(arch_.hidden + arch_.token_dim + k)) = temb[k];
      }
    }
    const ParamSet& p = model_.params();
    RowMatrix a = std::move(in);
    for (std::size_t l = 0; l < arch_.head_depth; ++l) {
      const std::string layer = head_layer(l);
      a = kernels::affine(a, p.at(layer + ".w"), p.at(layer + ".b"));
      if (l + 1 < arch_.head_depth) kernels::silu_inplace(a);
    }
    Tensor out = Tensor::from_matrix(a);
    out.require_finite("head");
    return out;
  }

  void commit(const Tensor& tokens) override {
    if (tokens.rows() != batch_ || tokens.cols() != arch_.token_dim) {
      throw ShapeError("sampler: committed token batch has wrong shape");
    }
    if (position_ >= arch_.max_tokens) throw InvalidArgument("sampler: sequence exceeds max_tokens");
    // Branch contexts computed for the finished position must be advanced
    // before the history changes.
    for (auto cond : {Conditioning::Prompt, Conditioning::Null}) {
      Branch& b = branches_[static_cast<std::size_t>(cond)];
      if (b.active && b.position < position_ + 1) advance(b, cond);
    }
    previous_ = tokens.mat();
    ++position_;
  }

 private:
  struct BlockCache {
    std::vector<RowMatrix> keys;    // per position: batch x hidden
    std::vector<RowMatrix> values;
  };
  struct Branch {
    bool active = false;
    std::size_t position = 0;  // number of encoder rows consumed
    std::vector<BlockCache> blocks;
    RowMatrix context;
  };

  // Context rows h_n for the current position (position_ + 1).
  const RowMatrix& context(Conditioning cond) {
    Branch& b = branches_[static_cast<std::size_t>(cond)];
    if (!b.active) {
      // A branch first queried mid-sequence cannot be rebuilt without the
      // earlier history.
      if (position_ != 0) throw InvalidArgument("sampler: branch first used after token 1");
      b.active = true;
    }
    if (b.position < position_ + 1) advance(b, cond);
    return b.context;
  }

  void advance(Branch& b, Conditioning cond) {
    const ParamSet& p = model_.params();
    const auto rows = static_cast<Eigen::Index>(batch_);
    const auto dt = static_cast<Eigen::Index>(arch_.token_dim);
    const auto dc = static_cast<Eigen::Index>(arch_.prompt_dim);
    RowMatrix in(rows, dt + dc + static_cast<Eigen::Index>(arch_.position_dim));
    in.leftCols(dt) = previous_;
    if (cond == Conditioning::Prompt) {
      in.middleCols(dt, dc) = prompts_;
    } else {
      in.middleCols(dt, dc) = p.at("enc.null").mat().row(0).replicate(rows, 1);
    }
    std::vector<double> pos(arch_.position_dim);
    kernels::time_embedding(position_phase(arch_, b.position + 1), pos);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (std::size_t k = 0; k < arch_.position_dim; ++k) {
        in(r, dt + dc + static_cast<Eigen::Index>(k)) = pos[k];
      }
    }
    RowMatrix z = kernels::affine(in, p.at("enc.in.w"), p.at("enc.in.b"));
    const double scale = 1.0 / std::sqrt(static_cast<double>(arch_.hidden));
    for (std::size_t l = 0; l < arch_.encoder_depth; ++l) {
      const std::string block = encoder_block(l);
      BlockCache& cache = b.blocks[l];
      const RowMatrix q = z * p.at(block + ".attn.wq").mat();
      cache.keys.push_back(z * p.at(block + ".attn.wk").mat());
      cache.values.push_back(z * p.at(block + ".attn.wv").mat());
      const std::size_t span = cache.keys.size();
      RowMatrix attended = RowMatrix::Zero(rows, static_cast<Eigen::Index>(arch_.hidden));
      std::vector<double> w(span);
      for (Eigen::Index r = 0; r < rows; ++r) {
        double peak = -INFINITY;
        for (std::size_t j = 0; j < span; ++j) {
          w[j] = q.row(r).dot(cache.keys[j].row(r)) * scale;
          peak = std::max(peak, w[j]);
        }
        double total = 0.0;
        for (std::size_t j = 0; j < span; ++j) {
          w[j] = std::exp(w[j] - peak);
          total += w[j];
        }
        for (std::size_t j = 0; j < span; ++j) attended.row(r) += (w[j] / total) * cache.values[j].row(r);
      }
      const RowMatrix y = z + attended;
      RowMatrix f = kernels::affine(y, p.at(block + ".ff.w"), p.at(block + ".ff.b"));
      kernels::silu_inplace(f);
      z = kernels::layer_norm(y + f, p.at(block + ".ln.gamma"), p.at(block + ".ln.beta"));
    }
    b.context = std::move(z);
    ++b.position;
  }

  const ArdmModel& model_;
  const ArdmArch& arch_;
  std::size_t batch_;
  std::size_t position_ = 0;  // tokens committed so far
  RowMatrix prompts_;
  RowMatrix previous_;
  Branch branches_[2];
};

}  // namespace

std::unique_ptr<DenoiserState> CachedArdm::begin(std::span<const Tensor> prompts) const {
  return std::make_unique<CachedState>(*model_, prompts);
}

std::vector<Sequence> sample_batch(const Denoiser& denoiser, std::span<const Tensor> prompts,
                                   std::size_t length, const schedule::SamplerConfig& sampler,
                                   std::span<const Rng> rngs, const ChainObserver& observer) {
  if (length < 1) throw InvalidArgument("sample: length must be at least 1");
  if (rngs.size() != prompts.size()) throw InvalidArgument("sample: one rng per prompt required");
  sampler.validate();
  const std::size_t batch = prompts.size();
  const std::size_t d = denoiser.token_dim();
  std::vector<Sequence> out(batch);
  for (std::size_t i = 0; i < batch; ++i) out[i] = {prompts[i], Tensor::matrix(length, d)};
  if (batch == 0) return out;

  const schedule::NoiseSchedule sched;
  const std::vector<double> grid = sampler.time_grid();
  const double w = sampler.guidance_w;
  auto state = denoiser.begin(prompts);

  for (std::size_t n = 1; n <= length; ++n) {
    std::vector<Rng> token_rngs;
    token_rngs.reserve(batch);
    for (const Rng& r : rngs) token_rngs.push_back(r.split(n));

    Tensor x = Tensor::matrix(batch, d);
    for (std::size_t i = 0; i < batch; ++i) {
      for (std::size_t j = 0; j < d; ++j) x.at(i, j) = token_rngs[i].normal_at(j);
    }
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      const double t = grid[k];
      const double t_next = grid[k + 1];
      if (observer) {
        for (std::size_t i = 0; i < batch; ++i) {
          ChainState s{i, n, t, Tensor::matrix(n - 1, d), Tensor::vector(d)};
          for (std::size_t r = 0; r + 1 < n; ++r) {
            std::copy(out[i].tokens.row(r).begin(), out[i].tokens.row(r).end(), s.history.row(r).begin());
          }
          std::copy(x.row(i).begin(), x.row(i).end(), s.current.data().begin());
          observer(s);
        }
      }
      Tensor v;
      if (w == 1.0) {
        v = state->velocity(x, t, Conditioning::Prompt);
      } else if (w == 0.0) {
        v = state->velocity(x, t, Conditioning::Null);
      } else {
        v = schedule::guidance_combine(state->velocity(x, t, Conditioning::Prompt),
                                       state->velocity(x, t, Conditioning::Null), w);
      }
      Tensor noise;
      if (sampler.eta > 0.0) {
        noise = Tensor::matrix(batch, d);
        for (std::size_t i = 0; i < batch; ++i) {
          for (std::size_t j = 0; j < d; ++j) {
            noise.at(i, j) = token_rngs[i].normal_at((k + 1) * d + j);
          }
        }
      }
      x = schedule::sampler_step(sched, x, v, t, t_next, sampler.eta, noise);
    }
    for (std::size_t i = 0; i < batch; ++i) {
      std::copy(x.row(i).begin(), x.row(i).end(), out[i].tokens.row(n - 1).begin());
    }
    state->commit(x);
    if (observer) {
      for (std::size_t i = 0; i < batch; ++i) {
        ChainState s{i, n, 0.0, Tensor::matrix(n, d), Tensor::vector(d)};
        for (std::size_t r = 0; r < n; ++r) {
          std::copy(out[i].tokens.row(r).begin(), out[i].tokens.row(r).end(), s.history.row(r).begin());
        }
        std::copy(x.row(i).begin(), x.row(i).end(), s.current.data().begin());
        observer(s);
      }
    }
  }
  return out;
}

Sequence sample_sequence(const Denoiser& denoiser, const Tensor& prompt, std::size_t length,
                         const schedule::SamplerConfig& sampler, const Rng& rng) {
  const Tensor prompts[] = {prompt};
  const Rng rngs[] = {rng};
  return std::move(sample_batch(denoiser, prompts, length, sampler, rngs).front());
}

}  // namespace ardpo::ardm

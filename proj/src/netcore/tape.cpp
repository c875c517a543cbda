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

#include "ardpo/netcore/tape.hpp"

#include <cmath>

#include "ardpo/error.hpp"
#include "ardpo/netcore/kernels.hpp"

namespace ardpo::netcore {

namespace {

std::string join(std::string_view layer, std::string_view leaf) {
  std::string out(layer);
  out += '.';
  out += leaf;
  return out;
}

[[noreturn]] void shape_fail(std::string_view layer, const std::string& detail) {
  throw ShapeError("layer '" + std::string(layer) + "': " + detail);
}

void accumulate(Tensor& dst, const RowMatrix& src) {
  if (dst.empty()) {
    dst = Tensor::from_matrix(src);
  } else {
    dst.mat() += src;
  }
}

}  // namespace

Tape::Tape(const ParamSet& params, TapeOptions options)
    : params_(&params), version_(params.version()), options_(options) {}

NodeId Tape::push(Node node) {
  check(node);
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

void Tape::check(const Node& node) const {
  if (options_.check_finite && node.op != Op::Parameter) node.value.require_finite(node.path);
}

const Tape::Node& Tape::node(NodeId id) const {
  if (id >= nodes_.size()) throw InvalidArgument("unknown tape node " + std::to_string(id));
  return nodes_[id];
}

const Tensor& Tape::value(NodeId id) const {
  const Node& n = node(id);
  return n.ref ? *n.ref : n.value;
}

NodeId Tape::constant(Tensor value) {
  return push(Node{Op::Constant, "constant", {}, std::move(value)});
}

NodeId Tape::input(Tensor value) { return push(Node{Op::Input, "input", {}, std::move(value)}); }

NodeId Tape::parameter(std::string_view path) {
  if (auto it = param_nodes_.find(path); it != param_nodes_.end()) return it->second;
  Node n{Op::Parameter, std::string(path), {}, {}};
  n.ref = &params_->at(path);
  const NodeId id = push(std::move(n));
  param_nodes_.emplace(std::string(path), id);
  return id;
}

NodeId Tape::affine(NodeId x, std::string_view layer) {
  const NodeId w = parameter(join(layer, "w"));
  const NodeId b = parameter(join(layer, "b"));
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  const Tensor& bv = value(b);
  if (wv.rank() != 2 || xv.cols() != wv.rows()) {
    shape_fail(layer, "input width " + std::to_string(xv.cols()) + " does not match weight " +
                          shape_string(wv.shape()));
  }
  if (bv.size() != wv.cols()) shape_fail(layer, "bias size does not match weight columns");
  Tensor out = Tensor::from_matrix(kernels::affine(xv.mat(), wv, bv));
  return push(Node{Op::Affine, std::string(layer), {x, w, b}, std::move(out)});
}

NodeId Tape::silu(NodeId x, std::string_view layer) {
  const Tensor& xv = value(x);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = kernels::silu(xv[i]);
  return push(Node{Op::Silu, std::string(layer), {x}, std::move(out)});
}

NodeId Tape::layer_norm(NodeId x, std::string_view layer) {
  const NodeId gamma = parameter(join(layer, "gamma"));
  const NodeId beta = parameter(join(layer, "beta"));
  const Tensor& xv = value(x);
  if (value(gamma).size() != xv.cols() || value(beta).size() != xv.cols()) {
    shape_fail(layer, "gain/bias width does not match input width " + std::to_string(xv.cols()));
  }
  RowMatrix xhat;
  Eigen::VectorXd inv_std;
  Tensor out =
      Tensor::from_matrix(kernels::layer_norm(xv.mat(), value(gamma), value(beta), &xhat, &inv_std));
  Node n{Op::LayerNorm, std::string(layer), {x, gamma, beta}, std::move(out)};
  Tensor istd = Tensor::vector(static_cast<std::size_t>(inv_std.size()));
  for (Eigen::Index i = 0; i < inv_std.size(); ++i) istd[static_cast<std::size_t>(i)] = inv_std[i];
  n.saved = {Tensor::from_matrix(xhat), std::move(istd)};
  return push(std::move(n));
}

NodeId Tape::causal_attention(NodeId x, std::string_view layer) {
  const NodeId wq = parameter(join(layer, "wq"));
  const NodeId wk = parameter(join(layer, "wk"));
  const NodeId wv = parameter(join(layer, "wv"));
  const Tensor& xv = value(x);
  for (NodeId w : {wq, wk, wv}) {
    if (value(w).rank() != 2 || value(w).rows() != xv.cols()) {
      shape_fail(layer, "projection " + shape_string(value(w).shape()) +
                            " does not match input width " + std::to_string(xv.cols()));
    }
  }
  if (value(wq).cols() != value(wk).cols()) shape_fail(layer, "query/key widths differ");
  const RowMatrix q = xv.mat() * value(wq).mat();
  const RowMatrix k = xv.mat() * value(wk).mat();
  const RowMatrix v = xv.mat() * value(wv).mat();
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  const Eigen::Index rows = q.rows();
  RowMatrix probs = RowMatrix::Zero(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    double peak = -INFINITY;
    for (Eigen::Index j = 0; j <= i; ++j) {
      probs(i, j) = q.row(i).dot(k.row(j)) * scale;
      peak = std::max(peak, probs(i, j));
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j <= i; ++j) {
      probs(i, j) = std::exp(probs(i, j) - peak);
      total += probs(i, j);
    }
    for (Eigen::Index j = 0; j <= i; ++j) probs(i, j) /= total;
  }
  Node n{Op::Attention, std::string(layer), {x, wq, wk, wv}, Tensor::from_matrix(probs * v)};
  n.saved = {Tensor::from_matrix(q), Tensor::from_matrix(k), Tensor::from_matrix(v),
             Tensor::from_matrix(probs)};
  return push(std::move(n));
}

NodeId Tape::time_embedding(std::span<const double> times, std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) throw ShapeError("time embedding width must be even and positive");
  Tensor out = Tensor::matrix(times.size(), dim);
  for (std::size_t r = 0; r < times.size(); ++r) kernels::time_embedding(times[r], out.row(r));
  return push(Node{Op::TimeEmbed, "time_embedding", {}, std::move(out)});
}

NodeId Tape::concat(std::initializer_list<NodeId> parts, std::string_view layer) {
  if (parts.size() == 0) shape_fail(layer, "concat of nothing");
  std::size_t rows = 1;
  std::size_t cols = 0;
  for (NodeId p : parts) {
    const Tensor& v = value(p);
    cols += v.cols();
    if (v.rows() != 1) {
      if (rows != 1 && rows != v.rows()) {
        shape_fail(layer, "row counts " + std::to_string(rows) + " and " +
                              std::to_string(v.rows()) + " cannot be concatenated");
      }
      rows = v.rows();
    }
  }
  Tensor out = Tensor::matrix(rows, cols);
  std::size_t offset = 0;
  for (NodeId p : parts) {
    const Tensor& v = value(p);
    for (std::size_t r = 0; r < rows; ++r) {
      const auto src = v.row(v.rows() == 1 ? 0 : r);
      std::copy(src.begin(), src.end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(offset));
    }
    offset += v.cols();
  }
  return push(Node{Op::Concat, std::string(layer), std::vector<NodeId>(parts), std::move(out)});
}

NodeId Tape::mean_pool(NodeId x, std::string_view layer) {
  const Tensor& xv = value(x);
  if (xv.rows() == 0) shape_fail(layer, "mean-pool over zero rows");
  RowMatrix m = xv.mat().colwise().mean();
  return push(Node{Op::MeanPool, std::string(layer), {x}, Tensor::from_matrix(m)});
}

NodeId Tape::add(NodeId a, NodeId b, std::string_view layer) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) {
    shape_fail(layer, "cannot add " + shape_string(av.shape()) + " and " + shape_string(bv.shape()));
  }
  Tensor out = Tensor::matrix(av.rows(), av.cols());
  out.mat() = av.mat() + bv.mat();
  return push(Node{Op::Add, std::string(layer), {a, b}, std::move(out)});
}

Gradients Tape::backward(NodeId output, const Tensor& output_grad) const {
  if (params_->version() != version_) {
    throw StaleTapeError("tape recorded at parameter version " + std::to_string(version_) +
                         " but parameters are now at version " +
                         std::to_string(params_->version()));
  }
  const Tensor& out = value(output);
  if (out.rows() != output_grad.rows() || out.cols() != output_grad.cols()) {
    throw ShapeError("output gradient " + shape_string(output_grad.shape()) +
                     " does not match output " + shape_string(out.shape()));
  }

  std::vector<Tensor> grads(nodes_.size());
  grads[output] = Tensor::matrix(out.rows(), out.cols());
  grads[output].mat() = output_grad.mat();

  for (NodeId id = output + 1; id-- > 0;) {
    if (grads[id].empty()) continue;
    const Node& n = nodes_[id];
    const RowMatrix g = grads[id].mat();
    switch (n.op) {
      case Op::Constant:
      case Op::Input:
      case Op::Parameter:
      case Op::TimeEmbed:
        break;
      case Op::Affine: {
        const Tensor& x = value(n.inputs[0]);
        const Tensor& w = value(n.inputs[1]);
        accumulate(grads[n.inputs[0]], g * w.mat().transpose());
        accumulate(grads[n.inputs[1]], x.mat().transpose() * g);
        accumulate(grads[n.inputs[2]], g.colwise().sum());
        break;
      }
      case Op::Silu: {
        const Tensor& x = value(n.inputs[0]);
        RowMatrix gx(g.rows(), g.cols());
        for (Eigen::Index i = 0; i < g.size(); ++i) {
          gx.data()[i] = g.data()[i] * kernels::silu_grad(x[static_cast<std::size_t>(i)]);
        }
        accumulate(grads[n.inputs[0]], gx);
        break;
      }
      case Op::LayerNorm: {
        const auto xhat = n.saved[0].mat();
        const Tensor& istd = n.saved[1];
        const auto gamma = value(n.inputs[1]).mat().row(0);
        accumulate(grads[n.inputs[1]], (g.array() * xhat.array()).colwise().sum().matrix());
        accumulate(grads[n.inputs[2]], g.colwise().sum());
        const RowMatrix gxhat = g.array().rowwise() * gamma.array();
        RowMatrix gx(g.rows(), g.cols());
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
          const double mean_g = gxhat.row(r).mean();
          const double mean_gx = gxhat.row(r).dot(xhat.row(r)) / static_cast<double>(g.cols());
          gx.row(r) = (gxhat.row(r).array() - mean_g - xhat.row(r).array() * mean_gx) *
                      istd[static_cast<std::size_t>(r)];
        }
        accumulate(grads[n.inputs[0]], gx);
        break;
      }
      case Op::Attention: {
        const auto q = n.saved[0].mat();
        const auto k = n.saved[1].mat();
        const auto v = n.saved[2].mat();
        const auto p = n.saved[3].mat();
        const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
        const RowMatrix gp = g * v.transpose();
        const RowMatrix gv = p.transpose() * g;
        RowMatrix gs = RowMatrix::Zero(p.rows(), p.cols());
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
          const double inner = gp.row(i).dot(p.row(i));
          for (Eigen::Index j = 0; j <= i; ++j) gs(i, j) = p(i, j) * (gp(i, j) - inner);
        }
        const RowMatrix gq = gs * k * scale;
        const RowMatrix gk = gs.transpose() * q * scale;
        const Tensor& x = value(n.inputs[0]);
        const auto xm = x.mat();
        accumulate(grads[n.inputs[0]], gq * value(n.inputs[1]).mat().transpose() +
                                           gk * value(n.inputs[2]).mat().transpose() +
                                           gv * value(n.inputs[3]).mat().transpose());
        accumulate(grads[n.inputs[1]], xm.transpose() * gq);
        accumulate(grads[n.inputs[2]], xm.transpose() * gk);
        accumulate(grads[n.inputs[3]], xm.transpose() * gv);
        break;
      }
      case Op::Concat: {
        Eigen::Index offset = 0;
        for (NodeId in : n.inputs) {
          const Tensor& part = value(in);
          const auto width = static_cast<Eigen::Index>(part.cols());
          const auto block = g.middleCols(offset, width);
          if (part.rows() == 1 && g.rows() != 1) {
            accumulate(grads[in], block.colwise().sum());
          } else {
            accumulate(grads[in], block);
          }
          offset += width;
        }
        break;
      }
      case Op::MeanPool: {
        const Tensor& x = value(n.inputs[0]);
        RowMatrix gx = g.replicate(static_cast<Eigen::Index>(x.rows()), 1) /
                       static_cast<double>(x.rows());
        accumulate(grads[n.inputs[0]], gx);
        break;
      }
      case Op::Add:
        accumulate(grads[n.inputs[0]], g);
        accumulate(grads[n.inputs[1]], g);
        break;
    }
  }

  Gradients result;
  result.params = params_->zeros_like();
  for (const auto& [path, id] : param_nodes_) {
    if (id > output || grads[id].empty()) continue;
    Tensor& dst = result.params.mutable_at(path);
    std::copy(grads[id].data().begin(), grads[id].data().end(), dst.data().begin());
  }
  result.nodes_.resize(nodes_.size());
  for (NodeId id = 0; id <= output; ++id) {
    if (nodes_[id].op != Op::Input) continue;
    result.nodes_[id] = grads[id].empty()
                            ? Tensor(nodes_[id].value.shape())
                            : Tensor(nodes_[id].value.shape(), grads[id].storage());
  }
  return result;
}

}  // namespace ardpo::netcore

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

#include "ardpo/netcore/kernels.hpp"

#include <cmath>

namespace ardpo::netcore::kernels {

RowMatrix affine(const Eigen::Ref<const RowMatrix>& x, const Tensor& w, const Tensor& b) {
  RowMatrix out = x * w.mat();
  out.rowwise() += b.mat().row(0);
  return out;
}

double silu(double x) noexcept { return x / (1.0 + std::exp(-x)); }

double silu_grad(double x) noexcept {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

void silu_inplace(RowMatrix& x) noexcept {
  double* p = x.data();
  for (Eigen::Index i = 0; i < x.size(); ++i) p[i] = silu(p[i]);
}

RowMatrix layer_norm(const Eigen::Ref<const RowMatrix>& x, const Tensor& gamma,
                     const Tensor& beta, RowMatrix* normalized, Eigen::VectorXd* inv_std) {
  const Eigen::Index rows = x.rows();
  const double width = static_cast<double>(x.cols());
  RowMatrix xhat(rows, x.cols());
  Eigen::VectorXd istd(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mean = x.row(r).sum() / width;
    const double var = (x.row(r).array() - mean).square().sum() / width;
    istd[r] = 1.0 / std::sqrt(var + kLayerNormEps);
    xhat.row(r) = (x.row(r).array() - mean) * istd[r];
  }
  RowMatrix out = xhat.array().rowwise() * gamma.mat().row(0).array();
  out.rowwise() += beta.mat().row(0);
  if (normalized) *normalized = std::move(xhat);
  if (inv_std) *inv_std = std::move(istd);
  return out;
}

void time_embedding(double t, std::span<double> out) noexcept {
  const std::size_t half = out.size() / 2;
  // Angular frequencies span 1 .. 64 over t in [0, 1].
  for (std::size_t k = 0; k < half; ++k) {
    const double freq =
        half > 1 ? std::exp(std::log(64.0) * static_cast<double>(k) / static_cast<double>(half - 1))
                 : 1.0;
    out[k] = std::sin(freq * t);
    out[half + k] = std::cos(freq * t);
  }
}

}  // namespace ardpo::netcore::kernels

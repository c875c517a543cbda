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

#include <span>

#include "ardpo/netcore/tensor.hpp"

// Forward kernels shared by the tape and the forward-only inference paths.
namespace ardpo::netcore::kernels {

inline constexpr double kLayerNormEps = 1e-5;

// out = x * w + b (row-wise); w is in x out, b has `out` entries.
RowMatrix affine(const Eigen::Ref<const RowMatrix>& x, const Tensor& w, const Tensor& b);

double silu(double x) noexcept;
double silu_grad(double x) noexcept;
void silu_inplace(RowMatrix& x) noexcept;

// Normalizes each row; optionally returns the normalized rows and 1/std.
RowMatrix layer_norm(const Eigen::Ref<const RowMatrix>& x, const Tensor& gamma,
                     const Tensor& beta, RowMatrix* normalized = nullptr,
                     Eigen::VectorXd* inv_std = nullptr);

// Sinusoidal embedding of a scalar in [0, 1]; `out.size()` must be even.
void time_embedding(double t, std::span<double> out) noexcept;

}  // namespace ardpo::netcore::kernels

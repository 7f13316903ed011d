/*
 * Copyright 2026 The Trailerness Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TRAILERNESS_SRC_NETWORKS_HPP_
#define TRAILERNESS_SRC_NETWORKS_HPP_

#include <functional>
#include <span>

#include "trailerness/model.hpp"

namespace trailerness::detail {

// Tensors per encoder block in declared order.
inline constexpr std::size_t kTensorsPerBlock = 16;

Eigen::VectorXd transformer_logits(const StreamModel& model,
                                   const RowMatrix& inputs,
                                   ForwardTrace* trace);

// Maps logits to d(loss)/d(logits).
using LogitGradientFn =
    std::function<Eigen::VectorXd(const Eigen::VectorXd& logits)>;

// Forward pass with cached activations, then reverse-mode accumulation of
// d(loss)/d(params) into `grad`.
void transformer_gradients(const StreamModel& model, const RowMatrix& inputs,
                           const LogitGradientFn& loss_gradient,
                           std::span<double> grad);

Eigen::VectorXd mlp_logits(const StreamModel& model, const RowMatrix& inputs);

void mlp_gradients(const StreamModel& model, const RowMatrix& inputs,
                   const LogitGradientFn& loss_gradient, std::span<double> grad);

}  // namespace trailerness::detail

#endif  // TRAILERNESS_SRC_NETWORKS_HPP_

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

#include <cmath>
#include <numbers>

#include "networks.hpp"
#include "trailerness/error.hpp"

namespace trailerness::detail {

namespace {

using ConstMat = Eigen::Map<const RowMatrix>;
using MutMat = Eigen::Map<RowMatrix>;

ConstMat view(std::span<const double> buffer, const TensorSpec& t) {
  return ConstMat(buffer.data() + t.offset, t.rows, t.cols);
}

MutMat view(std::span<double> buffer, const TensorSpec& t) {
  return MutMat(buffer.data() + t.offset, t.rows, t.cols);
}

double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
}

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf =
      std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
  return cdf + x * pdf;
}

// x W + 1 b^T for a (fan_in x fan_out) weight and a 1 x fan_out bias.
RowMatrix affine(const RowMatrix& x, const ConstMat& w, const ConstMat& b) {
  RowMatrix y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

// dW += x^T dy, db += colsum(dy); returns dx = dy W^T.
RowMatrix affine_backward(const RowMatrix& x, const RowMatrix& dy,
                          const ConstMat& w, MutMat dw, MutMat db) {
  dw.noalias() += x.transpose() * dy;
  db.row(0) += dy.colwise().sum();
  return dy * w.transpose();
}

void softmax_rows(RowMatrix& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    auto row = s.row(i);
    row.array() = (row.array() - row.maxCoeff()).exp();
    row /= row.sum();
  }
}

struct LayerNormCache {
  RowMatrix xhat;
  Eigen::VectorXd rstd;
};

RowMatrix layer_norm(const RowMatrix& x, const ConstMat& gain,
                     const ConstMat& bias, LayerNormCache& cache) {
  cache.xhat.resize(x.rows(), x.cols());
  cache.rstd.resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    const Eigen::ArrayXd centered = x.row(i).array().transpose() - mean;
    const double var = centered.square().mean();
    const double rstd = 1.0 / std::sqrt(var + kLayerNormEpsilon);
    cache.rstd(i) = rstd;
    cache.xhat.row(i) = (centered * rstd).transpose().matrix();
  }
  RowMatrix y = cache.xhat.array().rowwise() * gain.row(0).array();
  y.rowwise() += bias.row(0);
  return y;
}

RowMatrix layer_norm_backward(const RowMatrix& dy, const ConstMat& gain,
                              const LayerNormCache& cache, MutMat dgain,
                              MutMat dbias) {
  dgain.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  dbias.row(0) += dy.colwise().sum();
  const RowMatrix dxhat = dy.array().rowwise() * gain.row(0).array();
  RowMatrix dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const double m1 = dxhat.row(i).mean();
    const double m2 = dxhat.row(i).dot(cache.xhat.row(i)) /
                      static_cast<double>(dy.cols());
    dx.row(i) = cache.rstd(i) *
                (dxhat.row(i).array() - m1 - cache.xhat.row(i).array() * m2)
                    .matrix();
  }
  return dx;
}

struct BlockCache {
  RowMatrix input;
  RowMatrix q, k, v;
  std::vector<RowMatrix> attention;  // per head
  RowMatrix context;
  LayerNormCache norm1;
  RowMatrix y1;
  RowMatrix pre_activation;
  RowMatrix activation;
  LayerNormCache norm2;
};

struct TransformerCache {
  RowMatrix embedded;
  std::vector<BlockCache> blocks;
  RowMatrix output;
};

const TensorSpec& block_tensor(const StreamModel& m, int block, int slot) {
  return m.tensors()[2 + kTensorsPerBlock * block + slot];
}

enum Slot {
  kWq, kBq, kWk, kBk, kWv, kBv, kWo, kBo,
  kGain1, kBias1, kW1, kB1, kW2, kB2, kGain2, kBias2,
};

Eigen::VectorXd run_forward(const StreamModel& model, const RowMatrix& x,
                            TransformerCache* cache, ForwardTrace* trace) {
  const auto& cfg = model.config();
  const auto params = model.parameters();
  const auto& tensors = model.tensors();
  if (x.cols() != model.input_dim()) {
    throw InvalidInput("transformer input has dimension " +
                       std::to_string(x.cols()) + ", model expects " +
                       std::to_string(model.input_dim()));
  }
  if (x.rows() < 1) throw InvalidInput("transformer input has no units");
  const int n = static_cast<int>(x.rows());
  const int d_head = cfg.d_k / cfg.n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_head));

  RowMatrix h = affine(x, view(params, tensors[0]), view(params, tensors[1]));
  if (cfg.positional_encoding) h += positional_encoding(n, cfg.d_k);
  if (cache) {
    cache->embedded = h;
    cache->blocks.assign(static_cast<std::size_t>(cfg.n_blocks), {});
  }

  for (int b = 0; b < cfg.n_blocks; ++b) {
    auto p = [&](int slot) { return view(params, block_tensor(model, b, slot)); };
    BlockCache local;
    BlockCache& c = cache ? cache->blocks[static_cast<std::size_t>(b)] : local;
    c.input = h;
    c.q = affine(h, p(kWq), p(kBq));
    c.k = affine(h, p(kWk), p(kBk));
    c.v = affine(h, p(kWv), p(kBv));
    c.context.resize(n, cfg.d_k);
    c.attention.resize(static_cast<std::size_t>(cfg.n_heads));
    for (int head = 0; head < cfg.n_heads; ++head) {
      const auto cols = Eigen::seqN(head * d_head, d_head);
      RowMatrix s = c.q(Eigen::all, cols) * c.k(Eigen::all, cols).transpose() * scale;
      softmax_rows(s);
      c.context(Eigen::all, cols).noalias() = s * c.v(Eigen::all, cols);
      if (trace) trace->attention.push_back(s);
      c.attention[static_cast<std::size_t>(head)] = std::move(s);
    }
    const RowMatrix residual1 = h + affine(c.context, p(kWo), p(kBo));
    c.y1 = layer_norm(residual1, p(kGain1), p(kBias1), c.norm1);
    c.pre_activation = affine(c.y1, p(kW1), p(kB1));
    c.activation = c.pre_activation.unaryExpr(&gelu);
    const RowMatrix residual2 = c.y1 + affine(c.activation, p(kW2), p(kB2));
    h = layer_norm(residual2, p(kGain2), p(kBias2), c.norm2);
    if (trace) {
      trace->normalized.push_back(c.norm1.xhat);
      trace->normalized.push_back(c.norm2.xhat);
    }
  }

  const auto head_base = 2 + kTensorsPerBlock * static_cast<std::size_t>(cfg.n_blocks);
  const auto w_head = view(params, tensors[head_base]);
  const double b_head = params[tensors[head_base + 1].offset];
  Eigen::VectorXd logits = (h * w_head).col(0).array() + b_head;
  if (cache) cache->output = std::move(h);
  if (trace) trace->logits = logits;
  return logits;
}

}  // namespace

Eigen::VectorXd transformer_logits(const StreamModel& model,
                                   const RowMatrix& inputs,
                                   ForwardTrace* trace) {
  return run_forward(model, inputs, nullptr, trace);
}

void transformer_gradients(const StreamModel& model, const RowMatrix& inputs,
                           const LogitGradientFn& loss_gradient,
                           std::span<double> grad) {
  TransformerCache cache;
  const Eigen::VectorXd logits = run_forward(model, inputs, &cache, nullptr);
  const Eigen::VectorXd dlogits = loss_gradient(logits);

  const auto& cfg = model.config();
  const auto params = model.parameters();
  const auto& tensors = model.tensors();
  const int d_head = cfg.d_k / cfg.n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_head));

  const auto head_base = 2 + kTensorsPerBlock * static_cast<std::size_t>(cfg.n_blocks);
  const auto w_head = view(params, tensors[head_base]);
  auto dw_head = view(grad, tensors[head_base]);
  dw_head.col(0) += cache.output.transpose() * dlogits;
  grad[tensors[head_base + 1].offset] += dlogits.sum();
  RowMatrix dh = dlogits * w_head.col(0).transpose();

  for (int b = cfg.n_blocks - 1; b >= 0; --b) {
    auto p = [&](int slot) { return view(params, block_tensor(model, b, slot)); };
    auto g = [&](int slot) { return view(grad, block_tensor(model, b, slot)); };
    const BlockCache& c = cache.blocks[static_cast<std::size_t>(b)];

    // Second sublayer: h = LN2(y1 + MLP(y1)).
    const RowMatrix dresidual2 =
        layer_norm_backward(dh, p(kGain2), c.norm2, g(kGain2), g(kBias2));
    RowMatrix dactivation =
        affine_backward(c.activation, dresidual2, p(kW2), g(kW2), g(kB2));
    const RowMatrix dpre =
        dactivation.array() * c.pre_activation.unaryExpr(&gelu_derivative).array();
    RowMatrix dy1 = dresidual2 + affine_backward(c.y1, dpre, p(kW1), g(kW1), g(kB1));

    // First sublayer: y1 = LN1(input + MHSA(input)).
    const RowMatrix dresidual1 =
        layer_norm_backward(dy1, p(kGain1), c.norm1, g(kGain1), g(kBias1));
    const RowMatrix dcontext =
        affine_backward(c.context, dresidual1, p(kWo), g(kWo), g(kBo));
    RowMatrix dq(c.q.rows(), c.q.cols());
    RowMatrix dk(c.k.rows(), c.k.cols());
    RowMatrix dv(c.v.rows(), c.v.cols());
    for (int head = 0; head < cfg.n_heads; ++head) {
      const auto cols = Eigen::seqN(head * d_head, d_head);
      const RowMatrix& a = c.attention[static_cast<std::size_t>(head)];
      const RowMatrix dctx = dcontext(Eigen::all, cols);
      const RowMatrix da = dctx * c.v(Eigen::all, cols).transpose();
      dv(Eigen::all, cols).noalias() = a.transpose() * dctx;
      const Eigen::VectorXd row_dot = (da.array() * a.array()).rowwise().sum();
      const RowMatrix ds = a.array() * (da.colwise() - row_dot).array();
      dq(Eigen::all, cols).noalias() = ds * c.k(Eigen::all, cols) * scale;
      dk(Eigen::all, cols).noalias() = ds.transpose() * c.q(Eigen::all, cols) * scale;
    }
    dh = dresidual1;
    dh += affine_backward(c.input, dq, p(kWq), g(kWq), g(kBq));
    dh += affine_backward(c.input, dk, p(kWk), g(kWk), g(kBk));
    dh += affine_backward(c.input, dv, p(kWv), g(kWv), g(kBv));
  }

  // Positional encodings are constant; only the input projection learns.
  affine_backward(inputs, dh, view(params, tensors[0]), view(grad, tensors[0]),
                  view(grad, tensors[1]));
}

Eigen::VectorXd mlp_logits(const StreamModel& model, const RowMatrix& inputs) {
  if (inputs.cols() != model.input_dim()) {
    throw InvalidInput("MLP input has dimension " + std::to_string(inputs.cols()) +
                       ", model expects " + std::to_string(model.input_dim()));
  }
  const auto params = model.parameters();
  const auto& t = model.tensors();
  const RowMatrix hidden =
      affine(inputs, view(params, t[0]), view(params, t[1])).unaryExpr(&gelu);
  return (hidden * view(params, t[2])).col(0).array() + params[t[3].offset];
}

void mlp_gradients(const StreamModel& model, const RowMatrix& inputs,
                   const LogitGradientFn& loss_gradient, std::span<double> grad) {
  const auto params = model.parameters();
  const auto& t = model.tensors();
  const RowMatrix pre = affine(inputs, view(params, t[0]), view(params, t[1]));
  const RowMatrix hidden = pre.unaryExpr(&gelu);
  const Eigen::VectorXd logits =
      (hidden * view(params, t[2])).col(0).array() + params[t[3].offset];
  const Eigen::VectorXd dlogits = loss_gradient(logits);
  view(grad, t[2]).col(0) += hidden.transpose() * dlogits;
  grad[t[3].offset] += dlogits.sum();
  const RowMatrix dhidden = dlogits * view(params, t[2]).col(0).transpose();
  const RowMatrix dpre = dhidden.array() * pre.unaryExpr(&gelu_derivative).array();
  affine_backward(inputs, dpre, view(params, t[0]), view(grad, t[0]),
                  view(grad, t[1]));
}

}  // namespace trailerness::detail

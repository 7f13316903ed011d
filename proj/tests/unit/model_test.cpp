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

#include "trailerness/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <random>

#include "support/oracles.hpp"

namespace trailerness {
namespace {

RowMatrix random_inputs(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrix x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  return x;
}

LabelTrack random_labels(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LabelTrack labels{Granularity::kClip, std::vector<std::uint8_t>(n)};
  for (auto& l : labels.labels) l = static_cast<std::uint8_t>(rng() % 2);
  return labels;
}

StreamConfig tiny_config() {
  StreamConfig c;
  c.d_k = 16;
  c.n_heads = 4;
  c.n_blocks = 1;
  c.mlp_hidden = 64;
  return c;
}

StreamModel tiny_transformer(std::uint64_t seed, StreamConfig config = tiny_config()) {
  auto model = StreamModel::transformer(8, config);
  model.initialize(seed);
  return model;
}

TEST(PositionalEncoding, FirstRowAlternatesZeroOne) {
  const auto pe = positional_encoding(3, 10);
  for (int h = 0; h < 10; ++h) EXPECT_EQ(pe(0, h), h % 2 == 0 ? 0.0 : 1.0);
  EXPECT_NEAR(pe(1, 0), 0.841471, 1e-6);
  EXPECT_EQ(pe(1, 0), std::sin(1.0));
}

TEST(PositionalEncoding, MatchesClosedFormAtRandomEntries) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int d_k = 2 + static_cast<int>(rng() % 255);
    const int pos = static_cast<int>(rng() % 4096);
    const int h = static_cast<int>(rng() % d_k);
    const auto pe = positional_encoding(pos + 1, d_k);
    const double expected =
        h % 2 == 0 ? std::sin(pos / std::pow(10000.0, static_cast<double>(h) / d_k))
                   : std::cos(pos / std::pow(10000.0, static_cast<double>(h - 1) / d_k));
    EXPECT_NEAR(pe(pos, h), expected, 1e-12);
    EXPECT_LE(std::abs(pe(pos, h)), 1.0);
  }
  EXPECT_THROW(positional_encoding(0, 4), InvalidInput);
  EXPECT_THROW(positional_encoding(4, 1), InvalidInput);
}

TEST(Transformer, TensorLayout) {
  const auto model = tiny_transformer(0);
  EXPECT_EQ(model.tensor("input.weight").rows, 8);
  EXPECT_EQ(model.tensor("input.weight").cols, 16);
  EXPECT_EQ(model.tensor("block0.mlp.fc1.weight").cols, 64);
  EXPECT_EQ(model.tensor("head.weight").rows, 16);
  EXPECT_EQ(model.tensor("head.weight").cols, 1);
  std::size_t total = 0;
  for (const auto& t : model.tensors()) {
    EXPECT_EQ(t.offset, total);
    total += t.size();
  }
  EXPECT_EQ(total, model.parameters().size());
  EXPECT_THROW(model.tensor("nope"), InvalidInput);
}

TEST(Transformer, ZeroHeadGivesOneHalf) {
  auto model = tiny_transformer(2);
  model.tensor_map("head.weight").setZero();
  model.tensor_map("head.bias").setZero();
  const auto scores = forward(model, random_inputs(9, 8, 3));
  ASSERT_EQ(scores.size(), 9);
  for (const double s : scores) EXPECT_EQ(s, 0.5);
}

TEST(Transformer, OutputLengthMatchesInputForAnyN) {
  const auto model = tiny_transformer(3);
  for (const int n : {1, 2, 7, 64}) {
    const auto scores = forward(model, random_inputs(n, 8, n));
    ASSERT_EQ(scores.size(), n);
    for (const double s : scores) {
      EXPECT_GT(s, 0.0);
      EXPECT_LT(s, 1.0);
    }
  }
  ForwardTrace trace;
  forward(model, random_inputs(1, 8, 4), &trace);
  for (const auto& a : trace.attention) EXPECT_DOUBLE_EQ(a(0, 0), 1.0);
}

TEST(Transformer, RejectsDimensionMismatch) {
  const auto model = tiny_transformer(4);
  EXPECT_THROW(forward(model, random_inputs(5, 7, 1)), InvalidInput);
  EXPECT_THROW(forward(model, RowMatrix(0, 8)), InvalidInput);
  auto bad = tiny_config();
  bad.n_heads = 3;
  EXPECT_THROW(StreamModel::transformer(8, bad), InvalidInput);
}

TEST(Transformer, PermutationEquivariantWithoutPositionalEncoding) {
  auto config = tiny_config();
  config.positional_encoding = false;
  config.n_blocks = 2;
  const auto model = tiny_transformer(5, config);
  const auto x = random_inputs(11, 8, 6);
  std::vector<int> perm(11);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(7));
  RowMatrix permuted(11, 8);
  for (int i = 0; i < 11; ++i) permuted.row(i) = x.row(perm[i]);
  const auto a = forward(model, x);
  const auto b = forward(model, permuted);
  for (int i = 0; i < 11; ++i) EXPECT_NEAR(b(i), a(perm[i]), 1e-12);
}

TEST(Transformer, LayerNormAndAttentionInvariants) {
  auto config = tiny_config();
  config.n_blocks = 2;
  const auto model = tiny_transformer(6, config);
  ForwardTrace trace;
  forward(model, random_inputs(13, 8, 8) * 5.0, &trace);
  ASSERT_EQ(trace.attention.size(), 8u);
  ASSERT_EQ(trace.normalized.size(), 4u);
  for (const auto& a : trace.attention) {
    EXPECT_GE(a.minCoeff(), 0.0);
    for (Eigen::Index r = 0; r < a.rows(); ++r) EXPECT_NEAR(a.row(r).sum(), 1.0, 1e-6);
  }
  for (const auto& z : trace.normalized) {
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      const double mean = z.row(r).mean();
      const double var = (z.row(r).array() - mean).square().mean();
      EXPECT_NEAR(mean, 0.0, 1e-6);
      EXPECT_NEAR(var, 1.0, 1e-6);
    }
  }
}

TEST(Mlp, ActsPerUnit) {
  auto model = StreamModel::mlp(8, StreamConfig::mlp_baseline_defaults());
  model.initialize(9);
  const auto x = random_inputs(10, 8, 10);
  const auto all = forward(model, x);
  for (int i = 0; i < 10; ++i) {
    EXPECT_NEAR(forward(model, RowMatrix(x.row(i)))(0), all(i), 1e-15);
  }
  model.tensor_map("head.weight").setZero();
  for (const double s : forward(model, x)) EXPECT_EQ(s, 0.5);
}

TEST(FocalLoss, WorkedExamples) {
  const LabelTrack one{Granularity::kClip, {1}};
  const LabelTrack zero{Granularity::kClip, {0}};
  const std::vector<double> half{0.5};
  EXPECT_NEAR(focal_loss(half, one, 0.95, 1.0), 0.95 * 0.5 * std::numbers::ln2, 1e-15);
  EXPECT_NEAR(focal_loss(half, one, 0.95, 1.0), 0.329245, 1e-6);
  EXPECT_NEAR(focal_loss(half, zero, 1.0, 0.0), 0.693147, 1e-6);
  EXPECT_NEAR(focal_loss(std::vector<double>{1.0 - 1e-15}, one, 0.95, 1.0), 0.0, 1e-9);
  EXPECT_THROW(focal_loss(std::vector<double>{0.5, 0.5}, one, 1.0, 1.0), InvalidInput);
}

TEST(FocalLoss, GammaZeroIsScaledCrossEntropy) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(1e-6, 1.0 - 1e-6);
  std::vector<double> scores(200);
  for (auto& s : scores) s = uni(rng);
  const auto labels = random_labels(200, 12);
  double bce = 0.0;
  for (std::size_t i = 0; i < 200; ++i) {
    bce -= labels.labels[i] ? std::log(scores[i]) : std::log(1.0 - scores[i]);
  }
  bce /= 200.0;
  EXPECT_NEAR(focal_loss(scores, labels, 1.0, 0.0), bce, 1e-12);
  EXPECT_NEAR(focal_loss(scores, labels, 0.3, 0.0), 0.3 * bce, 1e-12);
}

TEST(FocalLoss, NonincreasingAsPredictionImproves) {
  const LabelTrack one{Granularity::kClip, {1}};
  double previous = std::numeric_limits<double>::infinity();
  for (double s = 0.01; s < 1.0; s += 0.01) {
    const double loss = focal_loss(std::vector<double>{s}, one, 0.95, 2.0);
    EXPECT_LE(loss, previous);
    EXPECT_GE(loss, 0.0);
    previous = loss;
  }
}

// The key bias cannot change attention weights, so its exact gradient is zero
// and the difference quotient is pure rounding noise (~1e-11). The floor keeps
// such entries from dividing noise by noise.
double gradient_relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

void expect_gradients_match_finite_differences(StreamModel model, const RowMatrix& x,
                                               const LabelTrack& labels, double alpha,
                                               double gamma) {
  const auto analytic = loss_and_gradients(model, x, labels, alpha, gamma);
  const std::vector<double> start(model.parameters().begin(), model.parameters().end());
  const auto numeric = oracle::central_differences(
      start,
      [&](const std::vector<double>& p) {
        std::copy(p.begin(), p.end(), model.parameters().begin());
        const Eigen::VectorXd s = forward(model, x);
        return focal_loss(std::span<const double>(s.data(), s.size()), labels, alpha, gamma);
      },
      1e-5);
  double worst = 0.0;
  std::string worst_name;
  for (const auto& t : model.tensors()) {
    for (std::size_t i = t.offset; i < t.offset + t.size(); ++i) {
      const double err = gradient_relative_error(analytic.gradient[i], numeric[i]);
      if (err > worst) {
        worst = err;
        worst_name = t.name;
      }
    }
  }
  EXPECT_LT(worst, 1e-4) << "worst tensor " << worst_name;
}

TEST(Gradients, MatchFiniteDifferencesTinyTransformer) {
  const auto model = tiny_transformer(13);
  expect_gradients_match_finite_differences(model, random_inputs(12, 8, 14),
                                            random_labels(12, 15), 0.95, 1.0);
}

TEST(Gradients, MatchFiniteDifferencesTwoBlocksGammaTwo) {
  auto config = tiny_config();
  config.n_blocks = 2;
  config.n_heads = 2;
  const auto model = tiny_transformer(16, config);
  expect_gradients_match_finite_differences(model, random_inputs(7, 8, 17),
                                            random_labels(7, 18), 0.6, 2.0);
}

TEST(Gradients, MatchFiniteDifferencesMlp) {
  auto config = StreamConfig::mlp_baseline_defaults();
  config.mlp_hidden = 12;
  auto model = StreamModel::mlp(8, config);
  model.initialize(19);
  expect_gradients_match_finite_differences(model, random_inputs(10, 8, 20),
                                            random_labels(10, 21), 0.98, 1.0);
}

TEST(Gradients, VanishAtConstructedOptimum) {
  auto model = tiny_transformer(22);
  model.tensor_map("head.weight").setZero();
  model.tensor_map("head.bias").setConstant(40.0);
  const LabelTrack ones{Granularity::kClip, std::vector<std::uint8_t>(6, 1)};
  const auto g = loss_and_gradients(model, random_inputs(6, 8, 23), ones, 0.95, 1.0);
  double norm = 0.0;
  for (const double v : g.gradient) norm += v * v;
  EXPECT_LT(std::sqrt(norm), 1e-12);
  EXPECT_LT(g.loss, 1e-12);
}

TEST(Gradients, DoublingAlphaDoublesEveryGradient) {
  const auto model = tiny_transformer(24);
  const auto x = random_inputs(9, 8, 25);
  const auto labels = random_labels(9, 26);
  const auto a = loss_and_gradients(model, x, labels, 0.4, 1.0);
  const auto b = loss_and_gradients(model, x, labels, 0.8, 1.0);
  ASSERT_EQ(a.gradient.size(), b.gradient.size());
  for (std::size_t i = 0; i < a.gradient.size(); ++i) {
    ASSERT_EQ(b.gradient[i], 2.0 * a.gradient[i]) << i;
  }
  EXPECT_EQ(b.loss, 2.0 * a.loss);
}

TEST(Gradients, LossMatchesForwardFocalLoss) {
  const auto model = tiny_transformer(27);
  const auto x = random_inputs(9, 8, 28);
  const auto labels = random_labels(9, 29);
  const auto s = forward(model, x);
  EXPECT_NEAR(loss_and_gradients(model, x, labels, 0.95, 1.0).loss,
              focal_loss(std::span<const double>(s.data(), s.size()), labels, 0.95, 1.0),
              1e-12);
}

TEST(Checkpoint, RoundTripPreservesEverything) {
  auto config = tiny_config();
  config.alpha = 0.9;
  config.seed = 77;
  config.patience = 5;
  config.threshold = 0.4;
  config.positional_encoding = false;
  const auto model = tiny_transformer(30, config);
  const auto dir = std::filesystem::temp_directory_path() / "trailerness_ckpt_test";
  std::filesystem::create_directories(dir);
  save_checkpoint(dir / "m.trlm", model);
  const auto back = load_checkpoint(dir / "m.trlm");
  EXPECT_TRUE(back == model);
  EXPECT_EQ(back.config().alpha, 0.9);
  EXPECT_EQ(back.config().seed, 77u);
  EXPECT_EQ(back.config().patience, 5);
  EXPECT_EQ(back.config().threshold, 0.4);
  EXPECT_FALSE(back.config().positional_encoding);
  const auto x = random_inputs(5, 8, 31);
  EXPECT_EQ(forward(back, x), forward(model, x));

  auto bytes = encode_checkpoint(model);
  bytes.pop_back();
  EXPECT_THROW(decode_checkpoint(bytes), FormatError);
  bytes = encode_checkpoint(model);
  bytes[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bytes), FormatError);
  EXPECT_THROW(load_checkpoint(dir / "missing.trlm"), IoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace trailerness

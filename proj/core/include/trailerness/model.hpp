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

#ifndef TRAILERNESS_MODEL_HPP_
#define TRAILERNESS_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "trailerness/features.hpp"
#include "trailerness/types.hpp"

namespace trailerness {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kLayerNormEpsilon = 1e-9;
inline constexpr double kScoreClamp = 1e-12;

// Hyperparameters shared by the transformer stream and the MLP baseline.
struct StreamConfig {
  int d_k = 128;
  int n_heads = 4;
  int n_blocks = 1;
  int mlp_hidden = 512;
  double alpha = 0.95;
  double gamma = 1.0;
  double learning_rate = 1e-4;
  int n_epochs = 200;
  std::uint64_t seed = 0;
  int patience = 0;  // early stopping on validation F1; 0 disables it
  double threshold = 0.5;
  bool positional_encoding = true;
  bool normalize_features = false;

  // Throws InvalidInput when a field is out of range.
  void validate() const;

  // alpha = 0.98 and early stopping, as used for the per-unit baseline.
  static StreamConfig mlp_baseline_defaults();
};

enum class ModelKind : std::uint8_t { kTransformer = 0, kMlp = 1 };

struct TensorSpec {
  std::string name;
  std::size_t offset = 0;
  int rows = 0;
  int cols = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

// Scorer parameters in one flat buffer; `tensors` declares the layout in
// checkpoint order. Weight matrices are stored (fan_in x fan_out) row-major.
class StreamModel {
 public:
  StreamModel() = default;

  // Zero-initialized parameters.
  static StreamModel transformer(int input_dim, const StreamConfig& config);
  static StreamModel mlp(int input_dim, const StreamConfig& config);

  // Xavier-uniform weights, zero biases, unit layer-norm gains.
  void initialize(std::uint64_t seed);

  ModelKind kind() const { return kind_; }
  int input_dim() const { return input_dim_; }
  const StreamConfig& config() const { return config_; }
  StreamConfig& mutable_config() { return config_; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  const std::vector<TensorSpec>& tensors() const { return tensors_; }
  const TensorSpec& tensor(const std::string& name) const;

  Eigen::Map<RowMatrix> tensor_map(const std::string& name);

  friend bool operator==(const StreamModel& a, const StreamModel& b) {
    return a.kind_ == b.kind_ && a.input_dim_ == b.input_dim_ &&
           a.params_ == b.params_;
  }

 private:
  void add_tensor(const std::string& name, int rows, int cols);

  ModelKind kind_ = ModelKind::kTransformer;
  int input_dim_ = 0;
  StreamConfig config_;
  std::vector<TensorSpec> tensors_;
  std::vector<double> params_;
};

// Sinusoidal encoding: sin(pos / 10000^(h / d_k)) at even h and
// cos(pos / 10000^((h - 1) / d_k)) at odd h.
RowMatrix positional_encoding(int n_positions, int d_k);

// float32 features widened to an N x D double matrix.
RowMatrix to_matrix(const FeatureSequence& features);

// Intermediate values exposed for invariant checks.
struct ForwardTrace {
  std::vector<RowMatrix> attention;   // [block * n_heads + head], N x N
  std::vector<RowMatrix> normalized;  // pre-gain layer-norm outputs, 2 per block
  Eigen::VectorXd logits;
};

// Scores in (0, 1), one per input row. Throws InvalidInput on a dimension
// mismatch.
Eigen::VectorXd forward(const StreamModel& model, const RowMatrix& inputs,
                        ForwardTrace* trace = nullptr);
ScoreTrack forward(const StreamModel& model, const FeatureSequence& features);

// Mean over units of -alpha (1 - o_p)^gamma log(o_p), where o_p is the score
// for positive labels and 1 - score otherwise. Scores are clamped to
// [1e-12, 1 - 1e-12] inside the log.
double focal_loss(std::span<const double> scores, const LabelTrack& labels,
                  double alpha, double gamma);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // same layout as StreamModel::parameters()
};

// Mean focal loss and its exact derivative with respect to every parameter.
LossGradient loss_and_gradients(const StreamModel& model,
                                const RowMatrix& inputs,
                                const LabelTrack& labels, double alpha,
                                double gamma);

// Checkpoint: "TRLM" | version | kind | config header | parameter count |
// little-endian float64 parameters in declared tensor order.
std::vector<std::uint8_t> encode_checkpoint(const StreamModel& model);
StreamModel decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const std::filesystem::path& path, const StreamModel& model);
StreamModel load_checkpoint(const std::filesystem::path& path);

}  // namespace trailerness

#endif  // TRAILERNESS_MODEL_HPP_

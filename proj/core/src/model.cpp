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

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>

#include "networks.hpp"
#include "trailerness/error.hpp"

namespace trailerness {

namespace fs = std::filesystem;

void StreamConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw InvalidInput("stream config: " + what);
  };
  if (d_k < 2) fail("d_k must be >= 2");
  if (n_heads < 1 || d_k % n_heads != 0) fail("d_k must be divisible by n_heads");
  if (n_blocks < 1) fail("n_blocks must be >= 1");
  if (mlp_hidden < 1) fail("mlp_hidden must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
  if (!(gamma >= 0.0)) fail("gamma must be >= 0");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (n_epochs < 1) fail("n_epochs must be >= 1");
  if (patience < 0) fail("patience must be >= 0");
  if (!(threshold >= 0.0 && threshold <= 1.0)) fail("threshold must lie in [0, 1]");
}

StreamConfig StreamConfig::mlp_baseline_defaults() {
  StreamConfig c;
  c.alpha = 0.98;
  c.gamma = 1.0;
  c.patience = 20;
  c.positional_encoding = false;
  return c;
}

void StreamModel::add_tensor(const std::string& name, int rows, int cols) {
  TensorSpec spec{name, params_.size(), rows, cols};
  params_.resize(params_.size() + spec.size(), 0.0);
  tensors_.push_back(std::move(spec));
}

StreamModel StreamModel::transformer(int input_dim, const StreamConfig& config) {
  config.validate();
  if (input_dim < 1) throw InvalidInput("input dimension must be positive");
  StreamModel m;
  m.kind_ = ModelKind::kTransformer;
  m.input_dim_ = input_dim;
  m.config_ = config;
  const int d = config.d_k;
  m.add_tensor("input.weight", input_dim, d);
  m.add_tensor("input.bias", 1, d);
  for (int b = 0; b < config.n_blocks; ++b) {
    const std::string p = "block" + std::to_string(b) + ".";
    for (const char* name : {"attn.query", "attn.key", "attn.value", "attn.out"}) {
      m.add_tensor(p + name + ".weight", d, d);
      m.add_tensor(p + name + ".bias", 1, d);
    }
    m.add_tensor(p + "norm1.gain", 1, d);
    m.add_tensor(p + "norm1.bias", 1, d);
    m.add_tensor(p + "mlp.fc1.weight", d, config.mlp_hidden);
    m.add_tensor(p + "mlp.fc1.bias", 1, config.mlp_hidden);
    m.add_tensor(p + "mlp.fc2.weight", config.mlp_hidden, d);
    m.add_tensor(p + "mlp.fc2.bias", 1, d);
    m.add_tensor(p + "norm2.gain", 1, d);
    m.add_tensor(p + "norm2.bias", 1, d);
  }
  m.add_tensor("head.weight", d, 1);
  m.add_tensor("head.bias", 1, 1);
  return m;
}

StreamModel StreamModel::mlp(int input_dim, const StreamConfig& config) {
  config.validate();
  if (input_dim < 1) throw InvalidInput("input dimension must be positive");
  StreamModel m;
  m.kind_ = ModelKind::kMlp;
  m.input_dim_ = input_dim;
  m.config_ = config;
  m.add_tensor("fc1.weight", input_dim, config.mlp_hidden);
  m.add_tensor("fc1.bias", 1, config.mlp_hidden);
  m.add_tensor("head.weight", config.mlp_hidden, 1);
  m.add_tensor("head.bias", 1, 1);
  return m;
}

void StreamModel::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (const auto& t : tensors_) {
    auto* data = params_.data() + t.offset;
    const bool is_gain = t.name.ends_with(".gain");
    const bool is_bias = t.name.ends_with(".bias");
    if (is_gain || is_bias) {
      std::fill(data, data + t.size(), is_gain ? 1.0 : 0.0);
      continue;
    }
    const double limit = std::sqrt(6.0 / (t.rows + t.cols));
    std::uniform_real_distribution<double> uni(-limit, limit);
    for (std::size_t i = 0; i < t.size(); ++i) data[i] = uni(rng);
  }
}

const TensorSpec& StreamModel::tensor(const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t;
  }
  throw InvalidInput("no parameter tensor named '" + name + "'");
}

Eigen::Map<RowMatrix> StreamModel::tensor_map(const std::string& name) {
  const auto& t = tensor(name);
  return Eigen::Map<RowMatrix>(params_.data() + t.offset, t.rows, t.cols);
}

RowMatrix positional_encoding(int n_positions, int d_k) {
  if (n_positions < 1 || d_k < 2) {
    throw InvalidInput("positional_encoding needs N >= 1 and d_k >= 2");
  }
  RowMatrix pe(n_positions, d_k);
  for (int h = 0; h < d_k; ++h) {
    const int even = h - (h % 2);
    const double denom = std::pow(10000.0, static_cast<double>(even) / d_k);
    for (int pos = 0; pos < n_positions; ++pos) {
      const double angle = pos / denom;
      pe(pos, h) = h % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

RowMatrix to_matrix(const FeatureSequence& features) {
  RowMatrix x(features.count, features.dim);
  for (std::size_t i = 0; i < features.values.size(); ++i) {
    x.data()[i] = features.values[i];
  }
  return x;
}

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct FocalTerm {
  double loss;
  double dlogit;
};

// Focal loss of one unit as a function of its logit.
FocalTerm focal_from_logit(double z, bool positive, double alpha, double gamma) {
  const double signed_z = positive ? z : -z;
  const double o = sigmoid(signed_z);
  const double rest = sigmoid(-signed_z);  // 1 - o_p without cancellation
  const double clamped = std::clamp(o, kScoreClamp, 1.0 - kScoreClamp);
  const double log_o = std::log(clamped);
  const double modulation = std::pow(rest, gamma);
  // d/d(signed_z) of -alpha rest^gamma log(clamp(o)).
  double d = alpha * gamma * modulation * o * log_o;
  if (o >= kScoreClamp && o <= 1.0 - kScoreClamp) d -= alpha * modulation * rest;
  return {-alpha * modulation * log_o, positive ? d : -d};
}

Eigen::VectorXd logits_of(const StreamModel& model, const RowMatrix& inputs,
                          ForwardTrace* trace) {
  if (model.kind() == ModelKind::kTransformer) {
    return detail::transformer_logits(model, inputs, trace);
  }
  return detail::mlp_logits(model, inputs);
}

void check_labels(const LabelTrack& labels, std::size_t n) {
  if (labels.size() != n) {
    throw InvalidInput("label count " + std::to_string(labels.size()) +
                       " does not match " + std::to_string(n) + " scores");
  }
}

}  // namespace

Eigen::VectorXd forward(const StreamModel& model, const RowMatrix& inputs,
                        ForwardTrace* trace) {
  const Eigen::VectorXd logits = logits_of(model, inputs, trace);
  return logits.unaryExpr([](double z) {
    return std::clamp(sigmoid(z), kScoreClamp, 1.0 - kScoreClamp);
  });
}

ScoreTrack forward(const StreamModel& model, const FeatureSequence& features) {
  const Eigen::VectorXd scores = forward(model, to_matrix(features));
  return {features.granularity,
          std::vector<double>(scores.data(), scores.data() + scores.size())};
}

double focal_loss(std::span<const double> scores, const LabelTrack& labels,
                  double alpha, double gamma) {
  check_labels(labels, scores.size());
  if (scores.empty()) throw InvalidInput("focal_loss: no scores");
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double o = labels.labels[i] ? scores[i] : 1.0 - scores[i];
    const double clamped = std::clamp(o, kScoreClamp, 1.0 - kScoreClamp);
    total += -alpha * std::pow(1.0 - o, gamma) * std::log(clamped);
  }
  return total / static_cast<double>(scores.size());
}

LossGradient loss_and_gradients(const StreamModel& model,
                                const RowMatrix& inputs,
                                const LabelTrack& labels, double alpha,
                                double gamma) {
  check_labels(labels, static_cast<std::size_t>(inputs.rows()));
  LossGradient result;
  result.gradient.assign(model.parameters().size(), 0.0);
  auto loss_gradient = [&](const Eigen::VectorXd& logits) {
    const double inv_n = 1.0 / static_cast<double>(logits.size());
    Eigen::VectorXd dlogits(logits.size());
    double total = 0.0;
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
      const auto term = focal_from_logit(logits(i), labels.labels[i] != 0, alpha, gamma);
      total += term.loss;
      dlogits(i) = term.dlogit * inv_n;
    }
    result.loss = total * inv_n;
    return dlogits;
  };
  if (model.kind() == ModelKind::kTransformer) {
    detail::transformer_gradients(model, inputs, loss_gradient, result.gradient);
  } else {
    detail::mlp_gradients(model, inputs, loss_gradient, result.gradient);
  }
  return result;
}

namespace {

constexpr char kCheckpointMagic[4] = {'T', 'R', 'L', 'M'};
constexpr std::uint8_t kCheckpointVersion = 1;

class Writer {
 public:
  void u8(std::uint8_t v) { bytes.push_back(v); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }

  std::vector<std::uint8_t> bytes;

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::uint64_t le(int n) {
    if (remaining() < static_cast<std::size_t>(n)) {
      throw FormatError("checkpoint truncated");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const StreamModel& model) {
  const auto& c = model.config();
  Writer w;
  for (const char ch : kCheckpointMagic) w.u8(static_cast<std::uint8_t>(ch));
  w.u8(kCheckpointVersion);
  w.u8(static_cast<std::uint8_t>(model.kind()));
  w.u32(static_cast<std::uint32_t>(model.input_dim()));
  w.u32(static_cast<std::uint32_t>(c.d_k));
  w.u32(static_cast<std::uint32_t>(c.n_heads));
  w.u32(static_cast<std::uint32_t>(c.n_blocks));
  w.u32(static_cast<std::uint32_t>(c.mlp_hidden));
  w.u8(static_cast<std::uint8_t>((c.positional_encoding ? 1 : 0) |
                                 (c.normalize_features ? 2 : 0)));
  w.f64(c.alpha);
  w.f64(c.gamma);
  w.f64(c.learning_rate);
  w.u32(static_cast<std::uint32_t>(c.n_epochs));
  w.u64(c.seed);
  w.u32(static_cast<std::uint32_t>(c.patience));
  w.f64(c.threshold);
  const auto params = model.parameters();
  w.u64(params.size());
  for (const double v : params) w.f64(v);
  return std::move(w.bytes);
}

StreamModel decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  for (const char ch : kCheckpointMagic) {
    if (r.u8() != static_cast<std::uint8_t>(ch)) {
      throw FormatError("checkpoint: bad magic");
    }
  }
  if (r.u8() != kCheckpointVersion) throw FormatError("checkpoint: unsupported version");
  const std::uint8_t kind = r.u8();
  if (kind > 1) throw FormatError("checkpoint: unknown model kind");
  StreamConfig c;
  const int input_dim = static_cast<int>(r.u32());
  c.d_k = static_cast<int>(r.u32());
  c.n_heads = static_cast<int>(r.u32());
  c.n_blocks = static_cast<int>(r.u32());
  c.mlp_hidden = static_cast<int>(r.u32());
  const std::uint8_t flags = r.u8();
  c.positional_encoding = (flags & 1) != 0;
  c.normalize_features = (flags & 2) != 0;
  c.alpha = r.f64();
  c.gamma = r.f64();
  c.learning_rate = r.f64();
  c.n_epochs = static_cast<int>(r.u32());
  c.seed = r.u64();
  c.patience = static_cast<int>(r.u32());
  c.threshold = r.f64();
  StreamModel model;
  try {
    model = kind == 0 ? StreamModel::transformer(input_dim, c)
                      : StreamModel::mlp(input_dim, c);
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  const std::uint64_t count = r.u64();
  if (count != model.parameters().size()) {
    throw FormatError("checkpoint: parameter count does not match its config");
  }
  if (r.remaining() != count * 8) {
    throw FormatError(r.remaining() < count * 8 ? "checkpoint truncated"
                                                : "checkpoint: trailing bytes");
  }
  for (auto& v : model.parameters()) {
    v = r.f64();
    if (!std::isfinite(v)) throw FormatError("checkpoint: non-finite parameter");
  }
  return model;
}

void save_checkpoint(const fs::path& path, const StreamModel& model) {
  const auto bytes = encode_checkpoint(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

StreamModel load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace trailerness

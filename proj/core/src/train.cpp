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

#include "trailerness/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "trailerness/error.hpp"
#include "trailerness/synth.hpp"

namespace trailerness {

VideoSample make_sample(std::string id, const FeatureSequence& features,
                        const LabelTrack& frame_labels,
                        const VideoTimeline& timeline, Scale scale,
                        bool normalize_features) {
  VideoSample s;
  s.id = std::move(id);
  s.bounds = timeline.bounds(scale);
  if (features.count != s.bounds.size()) {
    throw InvalidInput(s.id + ": " + std::to_string(features.count) +
                       " feature rows for " + std::to_string(s.bounds.size()) +
                       " " + scale_name(scale) + " units");
  }
  if (normalize_features) {
    FeatureSequence copy = features;
    l2_normalize_rows(copy);
    s.features = to_matrix(copy);
  } else {
    s.features = to_matrix(features);
  }
  s.unit_labels = unit_labels(frame_labels, timeline, scale);
  s.frame_labels = frame_labels;
  return s;
}

AdamOptimizer::AdamOptimizer(std::size_t n_params, double learning_rate,
                             double beta1, double beta2, double epsilon)
    : learning_rate_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon),
      m_(n_params, 0.0),
      v_(n_params, 0.0) {}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= learning_rate_ * m_hat / (std::sqrt(v_hat) + epsilon_);
  }
}

namespace {

constexpr std::uint64_t kInitStream = 11;
constexpr std::uint64_t kShuffleStream = 12;

void check_training_set(std::span<const VideoSample> train, int input_dim) {
  if (train.empty()) throw TrainingError("empty training set");
  std::size_t positives = 0, units = 0;
  for (const auto& s : train) {
    if (s.features.cols() != input_dim) {
      throw InvalidInput(s.id + ": feature dimension differs across videos");
    }
    if (s.unit_labels.size() != static_cast<std::size_t>(s.features.rows())) {
      throw InvalidInput(s.id + ": label count differs from feature rows");
    }
    positives += s.unit_labels.positives();
    units += s.unit_labels.size();
  }
  if (positives == 0 || positives == units) {
    throw TrainingError("training labels are all one class (" +
                        std::to_string(positives) + " of " +
                        std::to_string(units) + " units positive)");
  }
}

TrainResult run_training(StreamModel model, std::span<const VideoSample> train,
                         std::span<const VideoSample> validation) {
  const StreamConfig config = model.config();
  if (config.patience > 0 && validation.empty()) {
    throw InvalidInput("early stopping needs a validation set");
  }
  model.initialize(derive_seed(config.seed, kInitStream));
  std::mt19937_64 shuffle_rng(derive_seed(config.seed, kShuffleStream));
  AdamOptimizer adam(model.parameters().size(), config.learning_rate);

  TrainResult result;
  std::vector<double> best_params(model.parameters().begin(), model.parameters().end());
  double best_f1 = -1.0;
  int since_best = 0;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.n_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (const auto idx : order) {
      const auto& s = train[idx];
      const auto lg =
          loss_and_gradients(model, s.features, s.unit_labels, config.alpha, config.gamma);
      if (!std::isfinite(lg.loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch));
      }
      loss_sum += lg.loss;
      adam.step(model.parameters(), lg.gradient);
    }
    EpochRecord record{epoch, loss_sum / static_cast<double>(train.size()), 0.0};
    if (!validation.empty()) {
      record.val_f1 = evaluate_frames(model, validation, config.threshold).f1;
    }
    result.history.push_back(record);

    if (config.patience > 0) {
      if (record.val_f1 > best_f1) {
        best_f1 = record.val_f1;
        result.best_epoch = epoch;
        since_best = 0;
        std::copy(model.parameters().begin(), model.parameters().end(),
                  best_params.begin());
      } else if (++since_best >= config.patience) {
        result.stopped_early = epoch < config.n_epochs;
        break;
      }
    } else {
      result.best_epoch = epoch;
    }
  }
  if (config.patience > 0) {
    std::copy(best_params.begin(), best_params.end(), model.parameters().begin());
  }
  result.model = std::move(model);
  return result;
}

}  // namespace

TrainResult train_stream(std::span<const VideoSample> train,
                         std::span<const VideoSample> validation,
                         const StreamConfig& config) {
  config.validate();
  if (train.empty()) throw TrainingError("empty training set");
  const int input_dim = static_cast<int>(train.front().features.cols());
  check_training_set(train, input_dim);
  return run_training(StreamModel::transformer(input_dim, config), train, validation);
}

TrainResult train_mlp_baseline(std::span<const VideoSample> train,
                               std::span<const VideoSample> validation,
                               const StreamConfig& config) {
  config.validate();
  if (train.empty()) throw TrainingError("empty training set");
  const int input_dim = static_cast<int>(train.front().features.cols());
  check_training_set(train, input_dim);
  return run_training(StreamModel::mlp(input_dim, config), train, validation);
}

FrameScoreTrack predict_frames(const StreamModel& model, const VideoSample& sample,
                               std::set<StreamTag> contributing) {
  const Eigen::VectorXd scores = forward(model, sample.features);
  ScoreTrack units{sample.unit_labels.granularity,
                   std::vector<double>(scores.data(), scores.data() + scores.size())};
  return upsample_to_frames(units, sample.bounds,
                            static_cast<std::int64_t>(sample.frame_labels.size()),
                            std::move(contributing));
}

Metrics evaluate_frames(const StreamModel& model,
                        std::span<const VideoSample> samples, double threshold) {
  Confusion total;
  for (const auto& s : samples) {
    total += confusion(binarize(predict_frames(model, s), threshold), s.frame_labels);
  }
  return metrics_from(total);
}

ScoreTrack random_baseline(std::size_t n_units, std::uint64_t seed,
                           Granularity granularity) {
  if (n_units < 1) throw InvalidInput("random_baseline: need at least one unit");
  std::mt19937_64 rng(seed);
  ScoreTrack track{granularity, std::vector<double>(n_units)};
  for (auto& s : track.scores) {
    // (k + 0.5) / 2^53 for a uniform 53-bit k: never 0 or 1.
    s = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  }
  return track;
}

std::string history_csv(std::span<const EpochRecord> history) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,train_loss,val_F1\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << r.train_loss << ',' << r.val_f1 << '\n';
  }
  return out.str();
}

void write_history_csv(const std::filesystem::path& path,
                       std::span<const EpochRecord> history) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << history_csv(history);
}

}  // namespace trailerness

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

#ifndef TRAILERNESS_TRAIN_HPP_
#define TRAILERNESS_TRAIN_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "trailerness/eval.hpp"
#include "trailerness/features.hpp"
#include "trailerness/fusion.hpp"
#include "trailerness/model.hpp"
#include "trailerness/timeline.hpp"

namespace trailerness {

// One video of one stream: unit features, unit labels for the loss, and the
// frame labels that evaluation compares against.
struct VideoSample {
  std::string id;
  RowMatrix features;  // N x D
  LabelTrack unit_labels;
  Intervals bounds;  // frame extent of each unit
  LabelTrack frame_labels;
};

VideoSample make_sample(std::string id, const FeatureSequence& features,
                        const LabelTrack& frame_labels,
                        const VideoTimeline& timeline, Scale scale,
                        bool normalize_features = false);

class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t n_params, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);

  void step(std::span<double> params, std::span<const double> grad);

 private:
  double learning_rate_;
  double beta1_;
  double beta2_;
  double epsilon_;
  std::int64_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_f1 = 0.0;
};

struct TrainResult {
  StreamModel model;
  std::vector<EpochRecord> history;
  int best_epoch = 0;  // epoch whose parameters were kept
  bool stopped_early = false;
};

// Adam over whole-video steps in a seeded per-epoch shuffle. Bitwise
// reproducible for a fixed config.seed. With config.patience > 0 training
// stops after that many epochs without a validation F1 improvement and the
// best parameters are restored.
TrainResult train_stream(std::span<const VideoSample> train,
                         std::span<const VideoSample> validation,
                         const StreamConfig& config);

// Per-unit MLP (no sequence context) with the same loss and optimizer.
TrainResult train_mlp_baseline(std::span<const VideoSample> train,
                               std::span<const VideoSample> validation,
                               const StreamConfig& config);

// Frame-level predictions of one video.
FrameScoreTrack predict_frames(const StreamModel& model,
                               const VideoSample& sample,
                               std::set<StreamTag> contributing = {});

// Frame metrics pooled over all frames of all samples.
Metrics evaluate_frames(const StreamModel& model,
                        std::span<const VideoSample> samples, double threshold);

// i.i.d. uniform scores strictly inside (0, 1).
ScoreTrack random_baseline(std::size_t n_units, std::uint64_t seed,
                           Granularity granularity = Granularity::kClip);

std::string history_csv(std::span<const EpochRecord> history);
void write_history_csv(const std::filesystem::path& path,
                       std::span<const EpochRecord> history);

}  // namespace trailerness

#endif  // TRAILERNESS_TRAIN_HPP_

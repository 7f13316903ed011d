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

#ifndef TRAILERNESS_SYNTH_HPP_
#define TRAILERNESS_SYNTH_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "trailerness/features.hpp"
#include "trailerness/image.hpp"
#include "trailerness/timeline.hpp"

namespace trailerness {

// Parameters of the synthetic episode generator. Every positive unit receives
// a +signal_strength shift on each feature coordinate.
struct SynthConfig {
  std::int64_t n_frames = 1280;
  std::int64_t n_shots = 10;
  // 0.1 of the default 1280 frames is two whole clips; a partial final
  // segment caps clip-level frame precision below 1.
  double trailer_fraction = 0.1;
  double signal_strength = 3.0;
  double noise_rate = 0.0;  // salt-and-pepper rate on trailer frames
  std::uint32_t d_visual = 32;
  std::uint32_t d_text = 16;
  int frame_width = 32;
  int frame_height = 32;
  // Planted trailer frames come in runs aligned to multiples of this length.
  std::int64_t segment_len = kClipLength;
  double fps = kDefaultFps;
  bool render_frames = true;
};

// Cut threshold that separates the generator's shot changes from in-shot
// motion.
inline constexpr double kSynthCutThreshold = 75.0;

struct SyntheticEpisode {
  std::string id;
  VideoTimeline timeline;
  SubtitleTrack subtitles;
  FeatureSequence visual_clip;
  FeatureSequence textual_clip;
  FeatureSequence visual_shot;
  FeatureSequence textual_shot;
  LabelTrack planted;  // frame labels
  LabelTrack clip_labels;
  LabelTrack shot_labels;
  std::vector<std::int64_t> trailer_indices;  // episode frames copied
  // Empty unless SynthConfig::render_frames.
  std::vector<GrayImage> frames;
  std::vector<GrayImage> trailer_frames;

  const FeatureSequence& features(StreamTag tag) const;
};

enum class Split : std::uint8_t { kTrain, kValidation, kTest };
const char* split_name(Split split);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

// 60/20/20: train rounds half up, validation floors, test takes the rest
// (63 -> 38/12/13).
SplitCounts split_counts(std::size_t n_episodes);

// Seeded assignment of episodes to splits with split_counts() sizes.
std::vector<Split> assign_splits(std::size_t n_episodes, std::uint64_t seed);

struct SyntheticDataset {
  SynthConfig config;
  std::uint64_t seed = 0;
  std::vector<SyntheticEpisode> episodes;
  std::vector<Split> splits;
};

// Deterministic for fixed (config, seed). Throws InvalidInput for infeasible
// configurations.
SyntheticEpisode synth_episode(const SynthConfig& config, std::uint64_t seed);

SyntheticDataset synth_dataset(const SynthConfig& config,
                               std::size_t n_episodes, std::uint64_t seed);

// Uniformly random 8-bit raster.
GrayImage synth_random_image(int width, int height, std::uint64_t seed);

// Sets each pixel to 0 or 255 with probability `rate`.
GrayImage salt_and_pepper(const GrayImage& image, double rate,
                          std::uint64_t seed);

// Mixes a base seed with a stream index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace trailerness

#endif  // TRAILERNESS_SYNTH_HPP_

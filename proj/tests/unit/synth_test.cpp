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

#include "trailerness/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "trailerness/error.hpp"
#include "trailerness/hashmatch.hpp"

namespace trailerness {
namespace {

SynthConfig small_config() {
  SynthConfig c;
  c.n_frames = 640;
  c.n_shots = 5;
  c.trailer_fraction = 0.2;
  return c;
}

TEST(Synth, SameSeedIsBitwiseIdentical) {
  const auto a = synth_episode(small_config(), 3);
  const auto b = synth_episode(small_config(), 3);
  EXPECT_EQ(a.frames, b.frames);
  EXPECT_EQ(a.trailer_frames, b.trailer_frames);
  EXPECT_EQ(a.visual_clip.values, b.visual_clip.values);
  EXPECT_EQ(a.textual_shot.values, b.textual_shot.values);
  EXPECT_EQ(a.subtitles.entries, b.subtitles.entries);
  EXPECT_EQ(a.planted, b.planted);
  const auto c = synth_episode(small_config(), 4);
  EXPECT_NE(a.visual_clip.values, c.visual_clip.values);
}

TEST(Synth, PlantedLabelsAggregateToEmittedUnitLabels) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto config = small_config();
    config.segment_len = 37;
    config.render_frames = false;
    const auto ep = synth_episode(config, seed);
    EXPECT_EQ(aggregate_labels(ep.planted, ep.timeline.clip_bounds, Granularity::kClip),
              ep.clip_labels);
    EXPECT_EQ(aggregate_shot_labels(ep.planted, ep.timeline), ep.shot_labels);
    EXPECT_EQ(static_cast<std::int64_t>(ep.planted.positives()),
              std::llround(config.trailer_fraction * config.n_frames));
  }
}

TEST(Synth, NaiveShotDetectorRecoversPlantedCuts) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto ep = synth_episode(small_config(), seed);
    EXPECT_EQ(detect_shots_naive(ep.frames, kSynthCutThreshold), ep.timeline.shot_bounds);
  }
}

TEST(Synth, NoiselessTrailerRecoveredByHashing) {
  auto config = small_config();
  const auto ep = synth_episode(config, 11);
  const auto table = min_distance_table_mih(hash_frames(ep.frames),
                                            hash_frames(ep.trailer_frames), 1);
  EXPECT_EQ(label_frames(table, 1), ep.planted);
}

TEST(Synth, ZeroSignalLeavesClassMeansEqual) {
  auto config = small_config();
  config.signal_strength = 0.0;
  config.render_frames = false;
  config.n_frames = 64 * 400;
  config.trailer_fraction = 0.3;
  double pos = 0, neg = 0;
  std::size_t n_pos = 0, n_neg = 0;
  const auto ep = synth_episode(config, 5);
  for (std::size_t u = 0; u < ep.clip_labels.size(); ++u) {
    for (const float v : ep.visual_clip.row(u)) {
      (ep.clip_labels.labels[u] ? pos : neg) += v;
    }
    (ep.clip_labels.labels[u] ? n_pos : n_neg) += ep.visual_clip.dim;
  }
  EXPECT_NEAR(pos / n_pos, 0.0, 0.05);
  EXPECT_NEAR(neg / n_neg, 0.0, 0.05);
}

TEST(Synth, SignalShiftsPositiveUnits) {
  auto config = small_config();
  config.render_frames = false;
  const auto ep = synth_episode(config, 6);
  double pos = 0;
  std::size_t n = 0;
  for (std::size_t u = 0; u < ep.clip_labels.size(); ++u) {
    if (!ep.clip_labels.labels[u]) continue;
    for (const float v : ep.visual_clip.row(u)) pos += v;
    n += ep.visual_clip.dim;
  }
  ASSERT_GT(n, 0u);
  EXPECT_NEAR(pos / n, config.signal_strength, 0.5);
}

TEST(Synth, EmptySubtitleUnitsHaveZeroTextFeatures) {
  auto config = small_config();
  config.render_frames = false;
  config.n_frames = 64 * 60;
  const auto ep = synth_episode(config, 7);
  const auto text = align_subtitles(ep.subtitles, ep.timeline.clip_bounds, config.n_frames);
  std::size_t empty = 0;
  for (std::size_t u = 0; u < text.size(); ++u) {
    if (!text[u].empty()) continue;
    ++empty;
    for (const float v : ep.textual_clip.row(u)) EXPECT_EQ(v, 0.0f);
  }
  EXPECT_GT(empty, 0u);
}

TEST(Synth, InfeasibleConfigsAreRejected) {
  auto config = small_config();
  config.trailer_fraction = 1.0;
  EXPECT_THROW(synth_episode(config, 0), InvalidInput);
  config = small_config();
  config.n_shots = config.n_frames + 1;
  EXPECT_THROW(synth_episode(config, 0), InvalidInput);
  config = small_config();
  config.trailer_fraction = 0.9;  // 576 frames need two segments of 400
  config.segment_len = 400;       // only one aligned slot fits
  EXPECT_THROW(synth_episode(config, 0), InvalidInput);
  config = small_config();
  config.frame_width = 8;
  EXPECT_THROW(synth_episode(config, 0), InvalidInput);
}

TEST(Synth, SaltAndPepperHitsExpectedFraction) {
  const GrayImage base(100, 100, 128);
  const auto noisy = salt_and_pepper(base, 0.02, 1);
  std::size_t changed = 0;
  for (const auto p : noisy.pixels) {
    changed += p != 128;
    EXPECT_TRUE(p == 0 || p == 128 || p == 255);
  }
  EXPECT_NEAR(changed / 10000.0, 0.02, 0.006);
}

TEST(Splits, SixtyTwentyTwenty) {
  const auto c = split_counts(63);
  EXPECT_EQ(c.train, 38u);
  EXPECT_EQ(c.validation, 12u);
  EXPECT_EQ(c.test, 13u);
  const auto splits = assign_splits(63, 1);
  EXPECT_EQ(std::count(splits.begin(), splits.end(), Split::kTrain), 38);
  EXPECT_EQ(std::count(splits.begin(), splits.end(), Split::kValidation), 12);
  EXPECT_EQ(std::count(splits.begin(), splits.end(), Split::kTest), 13);
  EXPECT_EQ(split_counts(10).train, 6u);
  EXPECT_EQ(split_counts(10).validation, 2u);
  EXPECT_EQ(split_counts(10).test, 2u);
}

}  // namespace
}  // namespace trailerness

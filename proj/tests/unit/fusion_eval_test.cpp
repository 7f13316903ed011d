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

#include "trailerness/fusion.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <filesystem>
#include <random>

#include "trailerness/error.hpp"
#include "trailerness/eval.hpp"

namespace trailerness {
namespace {

const StreamTag kVisualClip{Modality::kVisual, Scale::kClip};
const StreamTag kTextualShot{Modality::kTextual, Scale::kShot};

FrameScoreTrack random_track(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  FrameScoreTrack t;
  t.scores.resize(n);
  for (auto& s : t.scores) s = uni(rng);
  return t;
}

TEST(Upsample, ReplicatesUnitScores) {
  const ScoreTrack scores{Granularity::kShot, {0.2, 0.9}};
  const Intervals bounds{{0, 3}, {3, 5}};
  const auto frames = upsample_to_frames(scores, bounds, 5, {kTextualShot});
  EXPECT_EQ(frames.scores, (std::vector<double>{0.2, 0.2, 0.2, 0.9, 0.9}));
  EXPECT_EQ(frames.contributing, std::set<StreamTag>{kTextualShot});
}

TEST(Upsample, RejectsBadTilings) {
  const ScoreTrack scores{Granularity::kClip, {0.2, 0.9}};
  EXPECT_THROW(upsample_to_frames(scores, Intervals{{0, 3}}, 3), InvalidInput);
  EXPECT_THROW(upsample_to_frames(scores, Intervals{{0, 3}, {4, 5}}, 5), InvalidInput);
  EXPECT_THROW(upsample_to_frames(scores, Intervals{{0, 3}, {3, 5}}, 6), InvalidInput);
}

TEST(Fuse, AveragesFramewise) {
  FrameScoreTrack a{{0.2, 0.4}, {kVisualClip}};
  FrameScoreTrack b{{0.6, 0.8}, {kTextualShot}};
  const std::vector<FrameScoreTrack> tracks{a, b};
  const auto fused = fuse(tracks);
  EXPECT_NEAR(fused.scores[0], 0.4, 1e-15);
  EXPECT_NEAR(fused.scores[1], 0.6, 1e-15);
  EXPECT_EQ(fused.contributing, (std::set<StreamTag>{kVisualClip, kTextualShot}));
}

TEST(Fuse, IdenticalTracksFuseBitwise) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto t = random_track(500, seed);
    for (std::size_t k = 1; k <= 4; ++k) {
      const std::vector<FrameScoreTrack> copies(k, t);
      const auto fused = fuse(copies);
      for (std::size_t i = 0; i < t.size(); ++i) {
        ASSERT_EQ(std::bit_cast<std::uint64_t>(fused.scores[i]),
                  std::bit_cast<std::uint64_t>(t.scores[i]));
      }
    }
  }
}

TEST(Fuse, OrderIndependentAndBounded) {
  std::vector<FrameScoreTrack> tracks;
  for (std::uint64_t s = 0; s < 4; ++s) tracks.push_back(random_track(300, 100 + s));
  const auto reference = fuse(tracks);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(tracks.begin(), tracks.end(), rng);
    EXPECT_EQ(fuse(tracks).scores, reference.scores);
  }
  for (std::size_t i = 0; i < 300; ++i) {
    double lo = 1.0, hi = 0.0, sum = 0.0;
    for (const auto& t : tracks) {
      lo = std::min(lo, t.scores[i]);
      hi = std::max(hi, t.scores[i]);
      sum += t.scores[i];
    }
    EXPECT_GE(reference.scores[i], lo);
    EXPECT_LE(reference.scores[i], hi);
    EXPECT_NEAR(reference.scores[i], sum / 4.0, 1e-15);
  }
}

TEST(Fuse, RejectsEmptyAndMismatched) {
  EXPECT_THROW(fuse(std::vector<FrameScoreTrack>{}), InvalidInput);
  const std::vector<FrameScoreTrack> tracks{random_track(3, 1), random_track(4, 2)};
  EXPECT_THROW(fuse(tracks), InvalidInput);
}

TEST(FrameScores, SaveLoadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "trailerness_fusion_test";
  std::filesystem::create_directories(dir);
  auto t = random_track(77, 3);
  t.contributing = {kVisualClip, kTextualShot};
  save_frame_scores(dir / "s.trlf", t);
  const auto back = load_frame_scores(dir / "s.trlf");
  EXPECT_EQ(back.contributing, t.contributing);
  ASSERT_EQ(back.size(), t.size());
  // Stored at 32-bit precision.
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(back.scores[i], static_cast<double>(static_cast<float>(t.scores[i])));
  }
  std::filesystem::remove_all(dir);
}

TEST(Binarize, TiesGoPositive) {
  const std::vector<double> scores{0.49, 0.5, 0.51};
  EXPECT_EQ(binarize(scores).labels, (std::vector<std::uint8_t>{0, 1, 1}));
  EXPECT_EQ(binarize(scores, 0.51).labels, (std::vector<std::uint8_t>{0, 0, 1}));
}

TEST(Metrics, WorkedExample) {
  const LabelTrack pred{Granularity::kFrame, {1, 1, 0, 0}};
  const LabelTrack gold{Granularity::kFrame, {1, 0, 1, 0}};
  const auto m = prf1(pred, gold);
  EXPECT_EQ(m.precision, 0.5);
  EXPECT_EQ(m.recall, 0.5);
  EXPECT_EQ(m.f1, 0.5);
  EXPECT_EQ(m.confusion, (Confusion{1, 1, 1, 1}));
}

TEST(Metrics, DegenerateCasesReportZero) {
  const LabelTrack none{Granularity::kFrame, {0, 0, 0}};
  const auto m = prf1(none, none);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.f1, 0.0);
  EXPECT_THROW(prf1(none, LabelTrack{Granularity::kFrame, {0}}), InvalidInput);
}

TEST(Metrics, F1MatchesCountIdentity) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 100;
    LabelTrack pred{Granularity::kFrame, std::vector<std::uint8_t>(n)};
    LabelTrack gold = pred;
    for (std::size_t i = 0; i < n; ++i) {
      pred.labels[i] = rng() % 2;
      gold.labels[i] = rng() % 3 == 0;
    }
    const auto m = prf1(pred, gold);
    const auto& c = m.confusion;
    EXPECT_EQ(c.total(), static_cast<std::int64_t>(n));
    if (c.tp > 0) {
      EXPECT_NEAR(m.f1, 2.0 * c.tp / (2.0 * c.tp + c.fp + c.fn), 1e-15);
      EXPECT_NEAR(m.f1, 2.0 * m.precision * m.recall / (m.precision + m.recall), 1e-15);
    } else {
      EXPECT_EQ(m.f1, 0.0);
    }
  }
}

TEST(Report, MeanAndSampleStd) {
  std::vector<SeedResult> runs(2);
  runs[0].seed = 0;
  runs[0].metrics.f1 = 0.4;
  runs[0].metrics.confusion = {1, 2, 3, 4};
  runs[1].seed = 1;
  runs[1].metrics.f1 = 0.6;
  runs[1].metrics.confusion = {1, 1, 1, 1};
  const auto report = multi_seed_report(runs);
  EXPECT_NEAR(report.mean.f1, 0.5, 1e-15);
  EXPECT_NEAR(report.std.f1, 0.141421, 1e-6);
  EXPECT_EQ(report.confusion, (Confusion{2, 3, 4, 5}));
}

TEST(Report, IdenticalRunsHaveZeroStd) {
  std::vector<SeedResult> runs(5);
  for (auto& r : runs) {
    r.metrics.precision = 0.3;
    r.metrics.recall = 0.7;
    r.metrics.f1 = 0.42;
  }
  const auto report = multi_seed_report(runs);
  EXPECT_EQ(report.std.precision, 0.0);
  EXPECT_EQ(report.std.recall, 0.0);
  EXPECT_EQ(report.std.f1, 0.0);
  EXPECT_EQ(report.mean.f1, 0.42);
}

TEST(Report, JsonRoundTrip) {
  std::vector<SeedResult> runs(3);
  for (std::size_t i = 0; i < 3; ++i) {
    runs[i].seed = i;
    runs[i].metrics = metrics_from(Confusion{static_cast<std::int64_t>(i + 1), 2, 3, 4});
  }
  auto report = multi_seed_report(runs);
  report.streams = {"visual_clip", "textual_shot"};
  const auto json = report_to_json(report);
  EXPECT_NE(json.find("\"per_seed\""), std::string::npos);
  EXPECT_NE(json.find("\"std\""), std::string::npos);
  const auto back = report_from_json(json);
  EXPECT_EQ(back.streams, report.streams);
  ASSERT_EQ(back.per_seed.size(), 3u);
  EXPECT_EQ(back.per_seed[2].seed, 2u);
  EXPECT_EQ(back.per_seed[2].metrics.confusion, runs[2].metrics.confusion);
  EXPECT_EQ(back.mean.f1, report.mean.f1);
  EXPECT_EQ(back.std.f1, report.std.f1);
  EXPECT_THROW(multi_seed_report(std::vector<SeedResult>{}), InvalidInput);
  EXPECT_THROW(report_from_json("{"), FormatError);
}

}  // namespace
}  // namespace trailerness

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

#include "trailerness/timeline.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "../support/oracles.hpp"
#include "trailerness/error.hpp"
#include "trailerness/labels_io.hpp"

namespace trailerness {
namespace {

Intervals random_tiling(std::int64_t n, std::mt19937_64& rng) {
  std::vector<std::int64_t> cuts;
  for (std::int64_t f = 1; f < n; ++f) {
    if (rng() % 23 == 0) cuts.push_back(f);
  }
  return shots_from_cuts(cuts, n);
}

LabelTrack frames(std::vector<std::uint8_t> labels) {
  return {Granularity::kFrame, std::move(labels)};
}

TEST(SegmentClips, Examples) {
  EXPECT_EQ(segment_clips(130, 64), (Intervals{{0, 64}, {64, 128}, {128, 130}}));
  EXPECT_EQ(segment_clips(64, 64), (Intervals{{0, 64}}));
  EXPECT_EQ(segment_clips(1, 64), (Intervals{{0, 1}}));
  EXPECT_THROW(segment_clips(0, 64), InvalidInput);
}

TEST(SegmentClips, AllButLastHaveFullLength) {
  for (std::int64_t n : {1, 63, 64, 65, 1000, 4096}) {
    const auto clips = segment_clips(n);
    validate_tiling(clips, n);
    for (std::size_t i = 0; i + 1 < clips.size(); ++i) EXPECT_EQ(clips[i].size(), 64);
    EXPECT_LE(clips.back().size(), 64);
  }
}

TEST(ValidateTiling, RejectsGapsOverlapsAndShortCoverage) {
  EXPECT_NO_THROW(validate_tiling(Intervals{{0, 3}, {3, 5}}, 5));
  EXPECT_THROW(validate_tiling(Intervals{{0, 3}, {4, 5}}, 5), InvalidInput);
  EXPECT_THROW(validate_tiling(Intervals{{0, 3}, {2, 5}}, 5), InvalidInput);
  EXPECT_THROW(validate_tiling(Intervals{{0, 3}}, 5), InvalidInput);
  EXPECT_THROW(validate_tiling(Intervals{}, 5), InvalidInput);
}

TEST(DetectShotsNaive, IdenticalFramesFormOneShot) {
  std::vector<GrayImage> frames(20, GrayImage(16, 16, 90));
  EXPECT_EQ(detect_shots_naive(frames, 10.0), (Intervals{{0, 20}}));
}

TEST(DetectShotsNaive, TwoConstantBlocks) {
  std::vector<GrayImage> frames(10, GrayImage(16, 16, 0));
  for (int i = 5; i < 10; ++i) frames[i] = GrayImage(16, 16, 255);
  EXPECT_EQ(detect_shots_naive(frames, 100.0), (Intervals{{0, 5}, {5, 10}}));
}

TEST(ShotCuts, RoundTripAndValidation) {
  const std::vector<std::int64_t> cuts{10, 50};
  const auto shots = shots_from_cuts(cuts, 60);
  EXPECT_EQ(shots, (Intervals{{0, 10}, {10, 50}, {50, 60}}));
  EXPECT_EQ(cuts_from_shots(shots), cuts);
  EXPECT_THROW(shots_from_cuts(std::vector<std::int64_t>{0}, 60), InvalidInput);
  EXPECT_THROW(shots_from_cuts(std::vector<std::int64_t>{60}, 60), InvalidInput);
  EXPECT_THROW(shots_from_cuts(std::vector<std::int64_t>{5, 5}, 60), InvalidInput);
}

TEST(AggregateLabels, OneThirdBoundaryOnFullClip) {
  std::vector<std::uint8_t> y(64, 0);
  std::fill(y.begin(), y.begin() + 22, 1);
  EXPECT_EQ(aggregate_labels(frames(y), segment_clips(64), Granularity::kClip).labels[0], 1);
  y[21] = 0;
  EXPECT_EQ(aggregate_labels(frames(y), segment_clips(64), Granularity::kClip).labels[0], 0);
}

TEST(AggregateLabels, AllZeroStaysZero) {
  const auto out = aggregate_labels(frames(std::vector<std::uint8_t>(300, 0)),
                                    segment_clips(300), Granularity::kClip);
  EXPECT_EQ(out.positives(), 0u);
  EXPECT_EQ(out.granularity, Granularity::kClip);
}

TEST(AggregateLabels, RejectsNonTilingBounds) {
  EXPECT_THROW(aggregate_labels(frames(std::vector<std::uint8_t>(10, 0)),
                                Intervals{{0, 4}, {5, 10}}, Granularity::kShot),
               InvalidInput);
}

TEST(AggregateLabels, MatchesCountingLoopOnRandomTracks) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 400);
    std::vector<std::uint8_t> y(static_cast<std::size_t>(n));
    const auto density = rng() % 5;
    for (auto& v : y) v = rng() % 5 < density;
    const auto bounds = random_tiling(n, rng);
    ASSERT_EQ(aggregate_labels(frames(y), bounds, Granularity::kShot).labels,
              oracle::brute_force_one_third(y, bounds));
  }
}

TEST(AggregateLabels, AddingPositivesNeverClearsUnit) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 300; ++trial) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 300);
    std::vector<std::uint8_t> y(static_cast<std::size_t>(n));
    for (auto& v : y) v = rng() % 4 == 0;
    const auto bounds = random_tiling(n, rng);
    const auto before = aggregate_labels(frames(y), bounds, Granularity::kShot);
    for (auto& v : y) v = v || rng() % 7 == 0;
    const auto after = aggregate_labels(frames(y), bounds, Granularity::kShot);
    for (std::size_t u = 0; u < bounds.size(); ++u) {
      EXPECT_GE(after.labels[u], before.labels[u]);
    }
  }
}

TEST(ShotLabels, UseMidpointAssignedClips) {
  // Clips [0,64) [64,128) [128,192); shots [0,100) [100,192).
  // Clip midpoints 32, 96, 160: shot 0 gets clips 0 and 1, shot 1 gets clip 2.
  const auto timeline = make_timeline(192, Intervals{{0, 100}, {100, 192}});
  const auto assigned = assign_clips_to_shots(timeline.clip_bounds, timeline.shot_bounds);
  EXPECT_EQ(assigned[0], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(assigned[1], (std::vector<std::size_t>{2}));

  std::vector<std::uint8_t> y(192, 0);
  std::fill(y.begin() + 64, y.begin() + 128, 1);  // clip 1 positive
  const auto shots = aggregate_shot_labels(frames(y), timeline);
  // Shot 0: 1 of 2 clips -> 3 >= 2 -> positive. Shot 1: 0 of 1.
  EXPECT_EQ(shots.labels, (std::vector<std::uint8_t>{1, 0}));
}

TEST(ShotLabels, ShotWithoutAssignedClipFallsBackToFrames) {
  // Shot [60,70) holds no clip midpoint (32 and 96).
  const auto timeline = make_timeline(128, Intervals{{0, 60}, {60, 70}, {70, 128}});
  std::vector<std::uint8_t> y(128, 0);
  std::fill(y.begin() + 60, y.begin() + 64, 1);  // 4 of 10 frames
  const auto shots = aggregate_shot_labels(frames(y), timeline);
  EXPECT_EQ(shots.labels, (std::vector<std::uint8_t>{0, 1, 0}));
}

TEST(AlignSubtitles, Examples) {
  const auto clips = segment_clips(128);
  SubtitleTrack subs{{{10, 70, "hello"}}};
  EXPECT_EQ(align_subtitles(subs, clips, 128),
            (std::vector<std::string>{"hello", "hello"}));
  EXPECT_EQ(align_subtitles(SubtitleTrack{}, clips, 128),
            (std::vector<std::string>{"", ""}));
  SubtitleTrack two{{{3, 8, "B"}, {0, 5, "A"}}};
  EXPECT_EQ(align_subtitles(two, segment_clips(64), 64), (std::vector<std::string>{"A B"}));
}

TEST(AlignSubtitles, TouchingIntervalsDoNotOverlap) {
  SubtitleTrack subs{{{64, 70, "x"}}};
  EXPECT_EQ(align_subtitles(subs, segment_clips(128), 128),
            (std::vector<std::string>{"", "x"}));
}

TEST(AlignSubtitles, ClampsPastEndWithoutError) {
  set_warnings_enabled(false);
  SubtitleTrack subs{{{100, 500, "late"}, {900, 950, "gone"}}};
  EXPECT_EQ(align_subtitles(subs, segment_clips(128), 128),
            (std::vector<std::string>{"", "late"}));
  set_warnings_enabled(true);
}

TEST(AlignSubtitles, OrderIndependentOfInputPermutation) {
  std::mt19937_64 rng(12);
  SubtitleTrack subs;
  for (int i = 0; i < 40; ++i) {
    const std::int64_t s = static_cast<std::int64_t>(rng() % 500);
    subs.entries.push_back({s, s + 1 + static_cast<std::int64_t>(rng() % 90),
                            "t" + std::to_string(i)});
  }
  const auto bounds = segment_clips(600);
  const auto reference = align_subtitles(subs, bounds, 600);
  EXPECT_EQ(reference.size(), bounds.size());
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(subs.entries.begin(), subs.entries.end(), rng);
    EXPECT_EQ(align_subtitles(subs, bounds, 600), reference);
  }
}

TEST(Srt, ParsesBlocksAndRoundsHalfUp) {
  const std::string srt =
      "1\r\n00:00:01,000 --> 00:00:02,020\r\nHello\r\nthere\r\n\r\n"
      "2\n00:00:02,500 --> 00:00:03,000\nAgain\n";
  const auto track = parse_srt(srt, 25.0);
  ASSERT_EQ(track.entries.size(), 2u);
  // 2.020 s * 25 = 50.5 -> 51
  EXPECT_EQ(track.entries[0], (Subtitle{25, 51, "Hello there"}));
  EXPECT_EQ(track.entries[1], (Subtitle{63, 75, "Again"}));  // 62.5 -> 63
  EXPECT_THROW(parse_srt("1\n00:00:01 --> x\nHi\n"), FormatError);
}

TEST(SubtitleFiles, JsonLinesRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "trailerness_subs_test";
  std::filesystem::create_directories(dir);
  SubtitleTrack subs{{{0, 5, "a \"quoted\" line"}, {7, 9, "b"}}};
  write_subtitles_jsonl(dir / "subs.jsonl", subs);
  EXPECT_EQ(read_subtitles_jsonl(dir / "subs.jsonl").entries, subs.entries);
  std::ofstream(dir / "bad.jsonl") << "{\"start_frame\": 5, \"end_frame\": 5, \"text\": \"x\"}\n";
  EXPECT_THROW(read_subtitles_jsonl(dir / "bad.jsonl"), FormatError);
  std::filesystem::remove_all(dir);
}

TEST(LabelRuns, EncodesOneRecordPerRun) {
  const auto text = encode_label_runs(frames({0, 0, 1, 1, 1, 0}));
  EXPECT_EQ(text,
            "{\"end_frame_exclusive\":2,\"label\":0,\"start_frame\":0}\n"
            "{\"end_frame_exclusive\":5,\"label\":1,\"start_frame\":2}\n"
            "{\"end_frame_exclusive\":6,\"label\":0,\"start_frame\":5}\n");
  EXPECT_EQ(decode_label_runs(text), frames({0, 0, 1, 1, 1, 0}));
  EXPECT_THROW(decode_label_runs("{\"start_frame\":1,\"end_frame_exclusive\":2,\"label\":0}\n"),
               FormatError);
}

}  // namespace
}  // namespace trailerness

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

#ifndef TRAILERNESS_TIMELINE_HPP_
#define TRAILERNESS_TIMELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "trailerness/image.hpp"
#include "trailerness/types.hpp"

namespace trailerness {

inline constexpr std::int64_t kClipLength = 64;
inline constexpr double kDefaultFps = 25.0;

enum class ShotSource : std::uint8_t { kIngested, kNaiveDetector };

// Clip and shot segmentation of one video. Both interval lists tile
// [0, frame_count).
struct VideoTimeline {
  std::int64_t frame_count = 0;
  double fps = kDefaultFps;
  Intervals clip_bounds;
  Intervals shot_bounds;
  ShotSource shot_source = ShotSource::kIngested;

  const Intervals& bounds(Scale scale) const {
    return scale == Scale::kClip ? clip_bounds : shot_bounds;
  }
};

// Throws InvalidInput unless `bounds` are sorted, disjoint, nonempty and
// exactly cover [0, frame_count).
void validate_tiling(std::span<const Interval> bounds, std::int64_t frame_count);

VideoTimeline make_timeline(std::int64_t frame_count, Intervals shot_bounds,
                            ShotSource source = ShotSource::kIngested,
                            double fps = kDefaultFps);

// Fixed-length clips; a shorter final clip is kept as its own unit.
Intervals segment_clips(std::int64_t frame_count,
                        std::int64_t clip_len = kClipLength);

// A cut is declared between frames j and j+1 when their mean absolute pixel
// difference exceeds `cut_threshold`.
Intervals detect_shots_naive(std::span<const GrayImage> frames,
                             double cut_threshold);

// A cut at j separates frame j-1 from frame j. Cuts outside (0, frame_count)
// and duplicates are rejected.
Intervals shots_from_cuts(std::span<const std::int64_t> cuts,
                          std::int64_t frame_count);
std::vector<std::int64_t> cuts_from_shots(std::span<const Interval> shots);

// One-third rule over the frames of each unit: 3 * positives >= size.
LabelTrack aggregate_labels(const LabelTrack& frame_labels,
                            std::span<const Interval> bounds,
                            Granularity target);

// For every shot, the indices of clips whose midpoint lies inside it.
std::vector<std::vector<std::size_t>> assign_clips_to_shots(
    std::span<const Interval> clip_bounds, std::span<const Interval> shot_bounds);

// One-third rule over the midpoint-assigned clip labels of each shot. A shot
// without any assigned clip falls back to the one-third rule over its frames.
LabelTrack aggregate_shot_labels(const LabelTrack& frame_labels,
                                 const VideoTimeline& timeline);

// Frame labels aggregated to clip or shot units of `timeline`.
LabelTrack unit_labels(const LabelTrack& frame_labels,
                       const VideoTimeline& timeline, Scale scale);

struct Subtitle {
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;  // exclusive
  std::string text;

  friend bool operator==(const Subtitle&, const Subtitle&) = default;
};

struct SubtitleTrack {
  std::vector<Subtitle> entries;
};

// Concatenates, in start order and separated by single spaces, the text of
// every subtitle sharing at least one frame with each unit. Subtitles running
// past frame_count are clamped with a warning.
std::vector<std::string> align_subtitles(const SubtitleTrack& subs,
                                         std::span<const Interval> bounds,
                                         std::int64_t frame_count);

SubtitleTrack read_subtitles_jsonl(const std::filesystem::path& path);
void write_subtitles_jsonl(const std::filesystem::path& path,
                           const SubtitleTrack& subs);

// SubRip subset: numbered blocks with "HH:MM:SS,mmm --> HH:MM:SS,mmm" and
// one or more text lines. Timestamps become frames by round-half-up of
// seconds * fps.
SubtitleTrack parse_srt(const std::string& text, double fps = kDefaultFps);
SubtitleTrack import_srt(const std::filesystem::path& path,
                         double fps = kDefaultFps);

std::vector<std::int64_t> read_shot_cuts(const std::filesystem::path& path);
void write_shot_cuts(const std::filesystem::path& path,
                     std::span<const std::int64_t> cuts);

}  // namespace trailerness

#endif  // TRAILERNESS_TIMELINE_HPP_

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

#ifndef TRAILERNESS_TYPES_HPP_
#define TRAILERNESS_TYPES_HPP_

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trailerness {

// Half-open frame interval [begin, end).
struct Interval {
  std::int64_t begin = 0;
  std::int64_t end = 0;

  std::int64_t size() const { return end - begin; }
  bool contains(std::int64_t frame) const {
    return frame >= begin && frame < end;
  }
  friend auto operator<=>(const Interval&, const Interval&) = default;
};

using Intervals = std::vector<Interval>;

enum class Granularity : std::uint8_t { kFrame, kClip, kShot };

const char* granularity_name(Granularity granularity);

// Binary trailerness labels aligned to the units of one granularity.
struct LabelTrack {
  Granularity granularity = Granularity::kFrame;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t positives() const;
  friend bool operator==(const LabelTrack&, const LabelTrack&) = default;
};

// kScore only tags serialized prediction tracks; streams are visual or
// textual.
// Trailerness likelihoods, one per unit of `granularity`.
struct ScoreTrack {
  Granularity granularity = Granularity::kClip;
  std::vector<double> scores;

  std::size_t size() const { return scores.size(); }
};

enum class Modality : std::uint8_t { kVisual = 0, kTextual = 1, kScore = 2 };
enum class Scale : std::uint8_t { kClip = 0, kShot = 1 };

// One (modality, scale) combination, e.g. visual_clip.
struct StreamTag {
  Modality modality = Modality::kVisual;
  Scale scale = Scale::kClip;

  friend auto operator<=>(const StreamTag&, const StreamTag&) = default;
};

const char* modality_name(Modality modality);
const char* scale_name(Scale scale);
std::string stream_name(StreamTag tag);
std::optional<StreamTag> parse_stream_name(std::string_view name);

// visual_clip, textual_clip, visual_shot, textual_shot.
std::vector<StreamTag> all_streams();

}  // namespace trailerness

#endif  // TRAILERNESS_TYPES_HPP_

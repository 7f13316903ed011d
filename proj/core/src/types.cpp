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

#include "trailerness/types.hpp"

#include <algorithm>

namespace trailerness {

const char* granularity_name(Granularity granularity) {
  switch (granularity) {
    case Granularity::kFrame:
      return "frame";
    case Granularity::kClip:
      return "clip";
    case Granularity::kShot:
      return "shot";
  }
  return "?";
}

std::size_t LabelTrack::positives() const {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](auto v) { return v != 0; }));
}

const char* modality_name(Modality modality) {
  switch (modality) {
    case Modality::kVisual:
      return "visual";
    case Modality::kTextual:
      return "textual";
    case Modality::kScore:
      return "score";
  }
  return "?";
}

const char* scale_name(Scale scale) {
  return scale == Scale::kClip ? "clip" : "shot";
}

std::string stream_name(StreamTag tag) {
  return std::string(modality_name(tag.modality)) + "_" +
         scale_name(tag.scale);
}

std::optional<StreamTag> parse_stream_name(std::string_view name) {
  for (const auto tag : all_streams()) {
    if (stream_name(tag) == name) return tag;
  }
  return std::nullopt;
}

std::vector<StreamTag> all_streams() {
  return {{Modality::kVisual, Scale::kClip},
          {Modality::kTextual, Scale::kClip},
          {Modality::kVisual, Scale::kShot},
          {Modality::kTextual, Scale::kShot}};
}

}  // namespace trailerness

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

#ifndef TRAILERNESS_FEATURES_HPP_
#define TRAILERNESS_FEATURES_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "trailerness/error.hpp"
#include "trailerness/timeline.hpp"
#include "trailerness/types.hpp"

namespace trailerness {

// N units x D embedding matrix of one stream, float32, row-major.
struct FeatureSequence {
  Modality modality = Modality::kVisual;
  Granularity granularity = Granularity::kClip;
  std::uint32_t dim = 0;
  std::uint32_t count = 0;
  std::vector<float> values;
  std::string provenance;

  FeatureSequence() = default;
  FeatureSequence(Modality m, Granularity g, std::uint32_t d, std::uint32_t n)
      : modality(m),
        granularity(g),
        dim(d),
        count(n),
        values(static_cast<std::size_t>(d) * n, 0.0f) {}

  std::span<float> row(std::size_t i) {
    return {values.data() + i * dim, dim};
  }
  std::span<const float> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
};

// Feature file layout (all integers little-endian):
//   "TRLF" | version u8 | modality u8 | scale u8 | D u32 | N u32 |
//   N * D float32, row-major
// modality: 0 visual, 1 textual, 2 score; scale: 0 clip, 1 shot, 2 frame.
inline constexpr std::uint8_t kFeatureFileVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 15;

class FeatureFileError : public FormatError {
 public:
  enum class Kind {
    kBadMagic,
    kBadVersion,
    kBadHeader,
    kTruncated,
    kTrailingBytes,
    kNonFinite,
    kShapeMismatch,
  };

  FeatureFileError(Kind kind, const std::string& message)
      : FormatError(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::vector<std::uint8_t> encode_features(const FeatureSequence& features);
FeatureSequence decode_features(std::span<const std::uint8_t> bytes);

void save_features(const std::filesystem::path& path,
                   const FeatureSequence& features);
FeatureSequence load_features(const std::filesystem::path& path);

// Loads and checks that N matches the unit count of `scale` in `timeline`
// (and D when expected_dim is nonzero).
FeatureSequence load_features(const std::filesystem::path& path,
                              const VideoTimeline& timeline, Scale scale,
                              std::uint32_t expected_dim = 0);

// Throws FeatureFileError(kNonFinite) on NaN or Inf.
void check_finite(const FeatureSequence& features);

// Shot row = mean of the clip rows whose midpoint lies in the shot, computed
// in double and stored as float. A shot without midpoint-assigned clips
// averages the clips that overlap it.
FeatureSequence pool_shot_features(const FeatureSequence& clip_features,
                                   const VideoTimeline& timeline);

// Scales every row to unit Euclidean norm; zero rows are left unchanged.
void l2_normalize_rows(FeatureSequence& features);

}  // namespace trailerness

#endif  // TRAILERNESS_FEATURES_HPP_

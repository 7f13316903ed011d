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

#ifndef TRAILERNESS_FUSION_HPP_
#define TRAILERNESS_FUSION_HPP_

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <vector>

#include "trailerness/types.hpp"

namespace trailerness {

// Frame-level trailerness likelihoods and the streams that produced them.
struct FrameScoreTrack {
  std::vector<double> scores;
  std::set<StreamTag> contributing;

  std::size_t size() const { return scores.size(); }
};

// Piecewise-constant replication of unit scores onto the frames of each
// unit. Throws InvalidInput unless `bounds` tile [0, frame_count) with one
// interval per score.
FrameScoreTrack upsample_to_frames(const ScoreTrack& scores,
                                   std::span<const Interval> bounds,
                                   std::int64_t frame_count,
                                   std::set<StreamTag> contributing = {});

// Frame-wise arithmetic mean over `tracks`; contributing streams are merged.
// The per-frame mean is independent of argument order and returns the
// common value exactly when all inputs agree.
FrameScoreTrack fuse(std::span<const FrameScoreTrack> tracks);

// Feature-file binary (modality score, scale frame, D = 1) plus a JSON
// sidecar at <path>.json listing the contributing streams.
void save_frame_scores(const std::filesystem::path& path,
                       const FrameScoreTrack& track);
FrameScoreTrack load_frame_scores(const std::filesystem::path& path);

}  // namespace trailerness

#endif  // TRAILERNESS_FUSION_HPP_

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

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "trailerness/error.hpp"
#include "trailerness/features.hpp"
#include "trailerness/timeline.hpp"

namespace trailerness {

namespace fs = std::filesystem;
using nlohmann::json;

FrameScoreTrack upsample_to_frames(const ScoreTrack& scores,
                                   std::span<const Interval> bounds,
                                   std::int64_t frame_count,
                                   std::set<StreamTag> contributing) {
  validate_tiling(bounds, frame_count);
  if (scores.size() != bounds.size()) {
    throw InvalidInput("upsample_to_frames: " + std::to_string(scores.size()) +
                       " scores for " + std::to_string(bounds.size()) + " units");
  }
  FrameScoreTrack out;
  out.contributing = std::move(contributing);
  out.scores.resize(static_cast<std::size_t>(frame_count));
  for (std::size_t u = 0; u < bounds.size(); ++u) {
    std::fill(out.scores.begin() + bounds[u].begin,
              out.scores.begin() + bounds[u].end, scores.scores[u]);
  }
  return out;
}

FrameScoreTrack fuse(std::span<const FrameScoreTrack> tracks) {
  if (tracks.empty()) throw InvalidInput("fuse: no tracks");
  const std::size_t n = tracks.front().size();
  for (const auto& t : tracks) {
    if (t.size() != n) throw InvalidInput("fuse: tracks differ in length");
  }
  FrameScoreTrack out;
  for (const auto& t : tracks) {
    out.contributing.insert(t.contributing.begin(), t.contributing.end());
  }
  out.scores.resize(n);
  std::vector<double> values(tracks.size());
  const double k = static_cast<double>(tracks.size());
  for (std::size_t f = 0; f < n; ++f) {
    for (std::size_t i = 0; i < tracks.size(); ++i) values[i] = tracks[i].scores[f];
    std::sort(values.begin(), values.end());
    // Mean as min + mean offset: sorted order fixes the rounding and equal
    // inputs contribute zero offsets.
    const double lo = values.front();
    double offset = 0.0;
    for (const double v : values) offset += v - lo;
    out.scores[f] = std::clamp(lo + offset / k, lo, values.back());
  }
  return out;
}

void save_frame_scores(const fs::path& path, const FrameScoreTrack& track) {
  if (track.scores.empty()) throw InvalidInput("save_frame_scores: empty track");
  FeatureSequence f(Modality::kScore, Granularity::kFrame, 1,
                    static_cast<std::uint32_t>(track.scores.size()));
  for (std::size_t i = 0; i < track.scores.size(); ++i) {
    f.values[i] = static_cast<float>(track.scores[i]);
  }
  save_features(path, f);
  json sidecar;
  sidecar["frame_count"] = track.scores.size();
  sidecar["contributing_streams"] = json::array();
  for (const auto tag : track.contributing) {
    sidecar["contributing_streams"].push_back(stream_name(tag));
  }
  const fs::path sidecar_path = path.string() + ".json";
  std::ofstream out(sidecar_path);
  if (!out) throw IoError("cannot write " + sidecar_path.string());
  out << sidecar.dump(2) << '\n';
}

FrameScoreTrack load_frame_scores(const fs::path& path) {
  const auto f = load_features(path);
  if (f.dim != 1 || f.granularity != Granularity::kFrame) {
    throw FormatError(path.string() + " is not a frame score track");
  }
  FrameScoreTrack track;
  track.scores.assign(f.values.begin(), f.values.end());
  const fs::path sidecar_path = path.string() + ".json";
  std::ifstream in(sidecar_path);
  if (!in) throw IoError("missing score sidecar " + sidecar_path.string());
  try {
    const auto sidecar = json::parse(in);
    if (sidecar.at("frame_count").get<std::size_t>() != track.scores.size()) {
      throw FormatError(sidecar_path.string() + ": frame_count mismatch");
    }
    for (const auto& name : sidecar.at("contributing_streams")) {
      const auto tag = parse_stream_name(name.get<std::string>());
      if (!tag) throw FormatError(sidecar_path.string() + ": unknown stream");
      track.contributing.insert(*tag);
    }
  } catch (const json::exception& e) {
    throw FormatError(sidecar_path.string() + ": " + e.what());
  }
  return track;
}

}  // namespace trailerness

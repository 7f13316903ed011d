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

#include "trailerness/features.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

namespace trailerness {

namespace fs = std::filesystem;
using Kind = FeatureFileError::Kind;

namespace {

constexpr char kMagic[4] = {'T', 'R', 'L', 'F'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes[at + i]} << (8 * i);
  return v;
}

std::uint8_t scale_code(Granularity g) {
  switch (g) {
    case Granularity::kClip:
      return 0;
    case Granularity::kShot:
      return 1;
    case Granularity::kFrame:
      return 2;
  }
  return 0xFF;
}

}  // namespace

void check_finite(const FeatureSequence& features) {
  for (std::size_t i = 0; i < features.values.size(); ++i) {
    if (!std::isfinite(features.values[i])) {
      throw FeatureFileError(
          Kind::kNonFinite,
          "non-finite feature value at row " + std::to_string(i / std::max<std::uint32_t>(1, features.dim)));
    }
  }
}

std::vector<std::uint8_t> encode_features(const FeatureSequence& features) {
  if (features.values.size() != std::size_t{features.dim} * features.count) {
    throw InvalidInput("feature matrix size does not match its shape");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kFeatureHeaderBytes + 4 * features.values.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(kFeatureFileVersion);
  out.push_back(static_cast<std::uint8_t>(features.modality));
  out.push_back(scale_code(features.granularity));
  put_u32(out, features.dim);
  put_u32(out, features.count);
  for (const float v : features.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

FeatureSequence decode_features(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic),
                                      bytes.begin(),
                                      [](char a, std::uint8_t b) {
                                        return static_cast<std::uint8_t>(a) == b;
                                      })) {
    throw FeatureFileError(Kind::kBadMagic, "feature file: bad magic");
  }
  if (bytes.size() < kFeatureHeaderBytes) {
    throw FeatureFileError(Kind::kTruncated, "feature file: truncated header");
  }
  if (bytes[4] != kFeatureFileVersion) {
    throw FeatureFileError(Kind::kBadVersion,
                           "feature file: unsupported version " +
                               std::to_string(bytes[4]));
  }
  FeatureSequence f;
  switch (bytes[5]) {
    case 0: f.modality = Modality::kVisual; break;
    case 1: f.modality = Modality::kTextual; break;
    case 2: f.modality = Modality::kScore; break;
    default:
      throw FeatureFileError(Kind::kBadHeader, "feature file: bad modality byte");
  }
  switch (bytes[6]) {
    case 0: f.granularity = Granularity::kClip; break;
    case 1: f.granularity = Granularity::kShot; break;
    case 2: f.granularity = Granularity::kFrame; break;
    default:
      throw FeatureFileError(Kind::kBadHeader, "feature file: bad scale byte");
  }
  f.dim = get_u32(bytes, 7);
  f.count = get_u32(bytes, 11);
  if (f.dim == 0 || f.count == 0) {
    throw FeatureFileError(Kind::kBadHeader, "feature file: zero dimension or count");
  }
  const std::uint64_t payload = std::uint64_t{f.dim} * f.count * 4;
  const std::uint64_t available = bytes.size() - kFeatureHeaderBytes;
  if (available < payload) {
    throw FeatureFileError(Kind::kTruncated,
                           "feature file: payload truncated (" +
                               std::to_string(available) + " of " +
                               std::to_string(payload) + " bytes)");
  }
  if (available > payload) {
    throw FeatureFileError(Kind::kTrailingBytes,
                           "feature file: unexpected trailing bytes");
  }
  f.values.resize(std::size_t{f.dim} * f.count);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    f.values[i] = std::bit_cast<float>(get_u32(bytes, kFeatureHeaderBytes + 4 * i));
  }
  check_finite(f);
  return f;
}

void save_features(const fs::path& path, const FeatureSequence& features) {
  const auto bytes = encode_features(features);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

FeatureSequence load_features(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  auto f = decode_features(bytes);
  f.provenance = path.string();
  return f;
}

FeatureSequence load_features(const fs::path& path,
                              const VideoTimeline& timeline, Scale scale,
                              std::uint32_t expected_dim) {
  auto f = load_features(path);
  const auto units = timeline.bounds(scale).size();
  if (f.count != units) {
    throw FeatureFileError(Kind::kShapeMismatch,
                           path.string() + ": " + std::to_string(f.count) +
                               " rows but the timeline has " +
                               std::to_string(units) + " " + scale_name(scale) +
                               " units");
  }
  if (expected_dim != 0 && f.dim != expected_dim) {
    throw FeatureFileError(Kind::kShapeMismatch,
                           path.string() + ": dimension " + std::to_string(f.dim) +
                               " != expected " + std::to_string(expected_dim));
  }
  return f;
}

FeatureSequence pool_shot_features(const FeatureSequence& clip_features,
                                   const VideoTimeline& timeline) {
  if (clip_features.count != timeline.clip_bounds.size() ||
      clip_features.values.size() !=
          std::size_t{clip_features.dim} * clip_features.count) {
    throw InvalidInput("pool_shot_features: " +
                       std::to_string(clip_features.count) +
                       " clip rows for a timeline with " +
                       std::to_string(timeline.clip_bounds.size()) + " clips");
  }
  auto assigned = assign_clips_to_shots(timeline.clip_bounds, timeline.shot_bounds);
  for (std::size_t s = 0; s < assigned.size(); ++s) {
    if (!assigned[s].empty()) continue;
    const Interval shot = timeline.shot_bounds[s];
    for (std::size_t c = 0; c < timeline.clip_bounds.size(); ++c) {
      const Interval clip = timeline.clip_bounds[c];
      if (clip.begin < shot.end && shot.begin < clip.end) assigned[s].push_back(c);
    }
  }
  FeatureSequence shots(clip_features.modality, Granularity::kShot,
                        clip_features.dim,
                        static_cast<std::uint32_t>(timeline.shot_bounds.size()));
  shots.provenance = clip_features.provenance + "|mean-pooled";
  std::vector<double> acc(clip_features.dim);
  for (std::size_t s = 0; s < assigned.size(); ++s) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto c : assigned[s]) {
      const auto row = clip_features.row(c);
      for (std::size_t d = 0; d < acc.size(); ++d) acc[d] += row[d];
    }
    auto out = shots.row(s);
    const double n = static_cast<double>(assigned[s].size());
    for (std::size_t d = 0; d < acc.size(); ++d) {
      out[d] = static_cast<float>(acc[d] / n);
    }
  }
  return shots;
}

void l2_normalize_rows(FeatureSequence& features) {
  for (std::size_t i = 0; i < features.count; ++i) {
    auto row = features.row(i);
    double sq = 0.0;
    for (const float v : row) sq += double{v} * v;
    if (sq == 0.0) continue;
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& v : row) v = static_cast<float>(v * inv);
  }
}

}  // namespace trailerness

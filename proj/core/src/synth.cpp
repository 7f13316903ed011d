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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace trailerness {

namespace {

constexpr std::uint64_t kShotStream = 1;
constexpr std::uint64_t kPlantStream = 2;
constexpr std::uint64_t kSubtitleStream = 3;
constexpr std::uint64_t kVisualStream = 4;
constexpr std::uint64_t kTextClipStream = 5;
constexpr std::uint64_t kTextShotStream = 6;
constexpr std::uint64_t kNoiseStream = 7;
constexpr std::uint64_t kSplitStream = 8;
constexpr std::uint64_t kFrameStreamBase = std::uint64_t{1} << 32;
constexpr std::uint64_t kShotTextureBase = std::uint64_t{2} << 32;
constexpr std::uint64_t kEpisodeBase = std::uint64_t{3} << 32;

constexpr double kDarkLevel = 60.0;
constexpr double kBrightLevel = 190.0;
constexpr double kShotTextureAmplitude = 15.0;
constexpr double kFrameFieldAmplitude = 45.0;

void validate(const SynthConfig& c) {
  auto fail = [](const std::string& what) {
    throw InvalidInput("synthetic config: " + what);
  };
  if (c.n_frames < 1) fail("n_frames must be positive");
  if (c.n_shots < 1 || c.n_shots > c.n_frames) fail("n_shots must lie in [1, n_frames]");
  if (!(c.trailer_fraction > 0.0 && c.trailer_fraction < 1.0)) {
    fail("trailer_fraction must lie in (0, 1)");
  }
  if (!(c.signal_strength >= 0.0)) fail("signal_strength must be >= 0");
  if (!(c.noise_rate >= 0.0 && c.noise_rate <= 1.0)) fail("noise_rate must lie in [0, 1]");
  if (c.d_visual < 1 || c.d_text < 1) fail("feature dimensions must be positive");
  if (c.frame_width < 9 || c.frame_height < 8) fail("frames must be at least 9x8");
  if (c.segment_len < 1) fail("segment_len must be positive");
  if (!(c.fps > 0.0)) fail("fps must be positive");
}

// Smooth field: bilinear interpolation of a grid_w x grid_h lattice of
// uniform values in [-amplitude, amplitude].
std::vector<double> smooth_field(int width, int height, int grid_w, int grid_h,
                                 double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-amplitude, amplitude);
  std::vector<double> lattice(static_cast<std::size_t>(grid_w) * grid_h);
  for (auto& v : lattice) v = uni(rng);
  std::vector<double> field(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    const double gy = (y + 0.5) / height * (grid_h - 1);
    const int y0 = std::min(static_cast<int>(gy), grid_h - 2);
    const double ty = gy - y0;
    for (int x = 0; x < width; ++x) {
      const double gx = (x + 0.5) / width * (grid_w - 1);
      const int x0 = std::min(static_cast<int>(gx), grid_w - 2);
      const double tx = gx - x0;
      const auto at = [&](int xx, int yy) {
        return lattice[static_cast<std::size_t>(yy) * grid_w + xx];
      };
      const double top = at(x0, y0) * (1 - tx) + at(x0 + 1, y0) * tx;
      const double bottom = at(x0, y0 + 1) * (1 - tx) + at(x0 + 1, y0 + 1) * tx;
      field[static_cast<std::size_t>(y) * width + x] = top * (1 - ty) + bottom * ty;
    }
  }
  return field;
}

Intervals synth_shots(const SynthConfig& c, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, kShotStream));
  std::vector<std::int64_t> cuts;
  const double nominal = static_cast<double>(c.n_frames) / c.n_shots;
  std::int64_t previous = 0;
  for (std::int64_t s = 1; s < c.n_shots; ++s) {
    const double center = nominal * s;
    const double jitter = 0.25 * nominal;
    std::uniform_real_distribution<double> uni(center - jitter, center + jitter);
    auto cut = static_cast<std::int64_t>(std::llround(uni(rng)));
    cut = std::clamp<std::int64_t>(cut, previous + 1, c.n_frames - (c.n_shots - s));
    cuts.push_back(cut);
    previous = cut;
  }
  return shots_from_cuts(cuts, c.n_frames);
}

LabelTrack plant_segments(const SynthConfig& c, std::uint64_t seed,
                          std::vector<std::int64_t>& indices) {
  const auto n_pos = std::max<std::int64_t>(
      1, std::llround(c.trailer_fraction * static_cast<double>(c.n_frames)));
  const std::int64_t n_slots = c.n_frames / c.segment_len;
  const std::int64_t n_segments = (n_pos + c.segment_len - 1) / c.segment_len;
  if (n_segments > n_slots) {
    throw InvalidInput("synthetic config: " + std::to_string(n_pos) +
                       " trailer frames do not fit into " +
                       std::to_string(n_slots) + " aligned segments of " +
                       std::to_string(c.segment_len) + " frames");
  }
  std::mt19937_64 rng(derive_seed(seed, kPlantStream));
  std::vector<std::int64_t> slots(static_cast<std::size_t>(n_slots));
  std::iota(slots.begin(), slots.end(), 0);
  std::shuffle(slots.begin(), slots.end(), rng);
  slots.resize(static_cast<std::size_t>(n_segments));

  LabelTrack planted{Granularity::kFrame,
                     std::vector<std::uint8_t>(static_cast<std::size_t>(c.n_frames))};
  std::int64_t remaining = n_pos;
  for (const auto slot : slots) {
    const std::int64_t len = std::min(remaining, c.segment_len);
    for (std::int64_t f = slot * c.segment_len; f < slot * c.segment_len + len; ++f) {
      planted.labels[static_cast<std::size_t>(f)] = 1;
    }
    remaining -= len;
  }
  indices.clear();
  for (std::int64_t f = 0; f < c.n_frames; ++f) {
    if (planted.labels[static_cast<std::size_t>(f)]) indices.push_back(f);
  }
  return planted;
}

SubtitleTrack synth_subtitles(const SynthConfig& c, const LabelTrack& planted,
                              std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, kSubtitleStream));
  std::uniform_int_distribution<std::int64_t> dense_gap(0, 16);
  std::uniform_int_distribution<std::int64_t> sparse_gap(24, 160);
  std::uniform_int_distribution<std::int64_t> length(25, 75);
  std::uniform_int_distribution<int> n_tokens(2, 6);
  std::uniform_int_distribution<int> token(0, 999);
  SubtitleTrack subs;
  std::int64_t f = 0;
  char buf[16];
  while (f < c.n_frames) {
    f += planted.labels[static_cast<std::size_t>(f)] ? dense_gap(rng) : sparse_gap(rng);
    if (f >= c.n_frames) break;
    const std::int64_t end = std::min(c.n_frames, f + length(rng));
    std::string text;
    const int k = n_tokens(rng);
    for (int t = 0; t < k; ++t) {
      std::snprintf(buf, sizeof(buf), "tok%03d", token(rng));
      if (!text.empty()) text.push_back(' ');
      text += buf;
    }
    subs.entries.push_back({f, end, std::move(text)});
    f = end;
  }
  return subs;
}

// N(0, 1) rows shifted by signal on positive units; rows flagged empty stay 0.
FeatureSequence gaussian_features(Modality modality, Granularity granularity,
                                  std::uint32_t dim, const LabelTrack& labels,
                                  const std::vector<bool>& empty, double signal,
                                  std::uint64_t seed) {
  FeatureSequence f(modality, granularity, dim,
                    static_cast<std::uint32_t>(labels.size()));
  f.provenance = std::string("synthetic-") + modality_name(modality);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t u = 0; u < labels.size(); ++u) {
    auto row = f.row(u);
    const double shift = labels.labels[u] ? signal : 0.0;
    for (auto& v : row) {
      const double draw = normal(rng);
      v = empty.empty() || !empty[u] ? static_cast<float>(draw + shift) : 0.0f;
    }
  }
  return f;
}

FeatureSequence textual_features(Granularity granularity, std::uint32_t dim,
                                 const LabelTrack& labels,
                                 const std::vector<std::string>& text,
                                 double signal, std::uint64_t seed) {
  std::vector<bool> empty(text.size());
  for (std::size_t u = 0; u < text.size(); ++u) empty[u] = text[u].empty();
  return gaussian_features(Modality::kTextual, granularity, dim, labels, empty,
                           signal, seed);
}

GrayImage render_frame(const SynthConfig& c, std::uint64_t seed,
                       std::size_t shot, std::int64_t frame) {
  const double level = shot % 2 == 0 ? kDarkLevel : kBrightLevel;
  const auto texture = smooth_field(c.frame_width, c.frame_height, 4, 4,
                                    kShotTextureAmplitude,
                                    derive_seed(seed, kShotTextureBase + shot));
  const auto motion = smooth_field(
      c.frame_width, c.frame_height, 10, 9, kFrameFieldAmplitude,
      derive_seed(seed, kFrameStreamBase + static_cast<std::uint64_t>(frame)));
  GrayImage image(c.frame_width, c.frame_height);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    image.pixels[i] = static_cast<std::uint8_t>(
        std::clamp(std::lround(level + texture[i] + motion[i]), 0L, 255L));
  }
  return image;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

const FeatureSequence& SyntheticEpisode::features(StreamTag tag) const {
  if (tag.modality == Modality::kVisual) {
    return tag.scale == Scale::kClip ? visual_clip : visual_shot;
  }
  return tag.scale == Scale::kClip ? textual_clip : textual_shot;
}

const char* split_name(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "?";
}

SplitCounts split_counts(std::size_t n) {
  SplitCounts counts;
  counts.train = (6 * n + 5) / 10;
  counts.validation = (2 * n) / 10;
  counts.test = n - counts.train - counts.validation;
  return counts;
}

std::vector<Split> assign_splits(std::size_t n, std::uint64_t seed) {
  const auto counts = split_counts(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Split> splits(n, Split::kTest);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < counts.train) {
      splits[order[i]] = Split::kTrain;
    } else if (i < counts.train + counts.validation) {
      splits[order[i]] = Split::kValidation;
    }
  }
  return splits;
}

GrayImage synth_random_image(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  GrayImage image(width, height);
  for (auto& p : image.pixels) p = static_cast<std::uint8_t>(byte(rng));
  return image;
}

GrayImage salt_and_pepper(const GrayImage& image, double rate,
                          std::uint64_t seed) {
  if (rate <= 0.0) return image;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution hit(rate);
  std::bernoulli_distribution salt(0.5);
  GrayImage out = image;
  for (auto& p : out.pixels) {
    if (hit(rng)) p = salt(rng) ? 255 : 0;
  }
  return out;
}

SyntheticEpisode synth_episode(const SynthConfig& config, std::uint64_t seed) {
  validate(config);
  SyntheticEpisode ep;
  ep.timeline = make_timeline(config.n_frames, synth_shots(config, seed),
                              ShotSource::kIngested, config.fps);
  ep.planted = plant_segments(config, seed, ep.trailer_indices);
  ep.clip_labels = unit_labels(ep.planted, ep.timeline, Scale::kClip);
  ep.shot_labels = unit_labels(ep.planted, ep.timeline, Scale::kShot);
  ep.subtitles = synth_subtitles(config, ep.planted, seed);

  ep.visual_clip = gaussian_features(
      Modality::kVisual, Granularity::kClip, config.d_visual, ep.clip_labels, {},
      config.signal_strength, derive_seed(seed, kVisualStream));
  ep.visual_shot = pool_shot_features(ep.visual_clip, ep.timeline);
  ep.textual_clip = textual_features(
      Granularity::kClip, config.d_text, ep.clip_labels,
      align_subtitles(ep.subtitles, ep.timeline.clip_bounds, config.n_frames),
      config.signal_strength, derive_seed(seed, kTextClipStream));
  ep.textual_shot = textual_features(
      Granularity::kShot, config.d_text, ep.shot_labels,
      align_subtitles(ep.subtitles, ep.timeline.shot_bounds, config.n_frames),
      config.signal_strength, derive_seed(seed, kTextShotStream));

  if (config.render_frames) {
    ep.frames.reserve(static_cast<std::size_t>(config.n_frames));
    std::size_t shot = 0;
    for (std::int64_t f = 0; f < config.n_frames; ++f) {
      while (!ep.timeline.shot_bounds[shot].contains(f)) ++shot;
      ep.frames.push_back(render_frame(config, seed, shot, f));
    }
    ep.trailer_frames.reserve(ep.trailer_indices.size());
    for (std::size_t i = 0; i < ep.trailer_indices.size(); ++i) {
      ep.trailer_frames.push_back(salt_and_pepper(
          ep.frames[static_cast<std::size_t>(ep.trailer_indices[i])],
          config.noise_rate, derive_seed(seed, kNoiseStream + 16 * i)));
    }
  }
  return ep;
}

SyntheticDataset synth_dataset(const SynthConfig& config, std::size_t n_episodes,
                               std::uint64_t seed) {
  if (n_episodes == 0) throw InvalidInput("synthetic dataset needs >= 1 episode");
  SyntheticDataset ds;
  ds.config = config;
  ds.seed = seed;
  ds.splits = assign_splits(n_episodes, derive_seed(seed, kSplitStream));
  ds.episodes.reserve(n_episodes);
  char id[32];
  for (std::size_t i = 0; i < n_episodes; ++i) {
    ds.episodes.push_back(synth_episode(config, derive_seed(seed, kEpisodeBase + i)));
    std::snprintf(id, sizeof(id), "ep%03zu", i);
    ds.episodes.back().id = id;
  }
  return ds;
}

}  // namespace trailerness

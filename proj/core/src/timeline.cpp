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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "trailerness/error.hpp"

namespace trailerness {

namespace fs = std::filesystem;
using nlohmann::json;

void validate_tiling(std::span<const Interval> bounds,
                     std::int64_t frame_count) {
  if (frame_count <= 0) throw InvalidInput("frame count must be positive");
  if (bounds.empty()) throw InvalidInput("empty interval list");
  std::int64_t expected = 0;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (bounds[i].begin != expected || bounds[i].end <= bounds[i].begin) {
      throw InvalidInput("intervals do not tile [0, " +
                         std::to_string(frame_count) + "): unit " +
                         std::to_string(i) + " is [" +
                         std::to_string(bounds[i].begin) + ", " +
                         std::to_string(bounds[i].end) + ")");
    }
    expected = bounds[i].end;
  }
  if (expected != frame_count) {
    throw InvalidInput("intervals end at " + std::to_string(expected) +
                       " instead of " + std::to_string(frame_count));
  }
}

VideoTimeline make_timeline(std::int64_t frame_count, Intervals shot_bounds,
                            ShotSource source, double fps) {
  if (!(fps > 0.0)) throw InvalidInput("fps must be positive");
  VideoTimeline timeline;
  timeline.frame_count = frame_count;
  timeline.fps = fps;
  timeline.clip_bounds = segment_clips(frame_count);
  validate_tiling(shot_bounds, frame_count);
  timeline.shot_bounds = std::move(shot_bounds);
  timeline.shot_source = source;
  return timeline;
}

Intervals segment_clips(std::int64_t frame_count, std::int64_t clip_len) {
  if (frame_count < 1) throw InvalidInput("segment_clips: frame_count must be >= 1");
  if (clip_len < 1) throw InvalidInput("segment_clips: clip_len must be >= 1");
  Intervals clips;
  clips.reserve(static_cast<std::size_t>((frame_count + clip_len - 1) / clip_len));
  for (std::int64_t b = 0; b < frame_count; b += clip_len) {
    clips.push_back({b, std::min(frame_count, b + clip_len)});
  }
  return clips;
}

Intervals detect_shots_naive(std::span<const GrayImage> frames,
                             double cut_threshold) {
  if (frames.empty()) throw InvalidInput("detect_shots_naive: no frames");
  std::vector<std::int64_t> cuts;
  for (std::size_t j = 0; j + 1 < frames.size(); ++j) {
    const auto& a = frames[j].pixels;
    const auto& b = frames[j + 1].pixels;
    if (a.size() != b.size() || a.empty()) {
      throw InvalidInput("detect_shots_naive: frames differ in size at " +
                         std::to_string(j));
    }
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      total += static_cast<std::uint64_t>(std::abs(int{a[i]} - int{b[i]}));
    }
    const double mad = static_cast<double>(total) / static_cast<double>(a.size());
    if (mad > cut_threshold) cuts.push_back(static_cast<std::int64_t>(j + 1));
  }
  return shots_from_cuts(cuts, static_cast<std::int64_t>(frames.size()));
}

Intervals shots_from_cuts(std::span<const std::int64_t> cuts,
                          std::int64_t frame_count) {
  if (frame_count < 1) throw InvalidInput("shots_from_cuts: frame_count must be >= 1");
  std::vector<std::int64_t> sorted(cuts.begin(), cuts.end());
  std::sort(sorted.begin(), sorted.end());
  Intervals shots;
  std::int64_t begin = 0;
  for (const auto cut : sorted) {
    if (cut <= begin || cut >= frame_count) {
      throw InvalidInput("shot cut " + std::to_string(cut) +
                         " is duplicated or outside (0, " +
                         std::to_string(frame_count) + ")");
    }
    shots.push_back({begin, cut});
    begin = cut;
  }
  shots.push_back({begin, frame_count});
  return shots;
}

std::vector<std::int64_t> cuts_from_shots(std::span<const Interval> shots) {
  std::vector<std::int64_t> cuts;
  for (std::size_t i = 1; i < shots.size(); ++i) cuts.push_back(shots[i].begin);
  return cuts;
}

LabelTrack aggregate_labels(const LabelTrack& frame_labels,
                            std::span<const Interval> bounds,
                            Granularity target) {
  const auto n = static_cast<std::int64_t>(frame_labels.labels.size());
  validate_tiling(bounds, n);
  LabelTrack out{target, std::vector<std::uint8_t>(bounds.size())};
  for (std::size_t u = 0; u < bounds.size(); ++u) {
    std::int64_t positives = 0;
    for (std::int64_t f = bounds[u].begin; f < bounds[u].end; ++f) {
      positives += frame_labels.labels[f] != 0;
    }
    out.labels[u] = 3 * positives >= bounds[u].size() ? 1 : 0;
  }
  return out;
}

std::vector<std::vector<std::size_t>> assign_clips_to_shots(
    std::span<const Interval> clip_bounds,
    std::span<const Interval> shot_bounds) {
  std::vector<std::vector<std::size_t>> assigned(shot_bounds.size());
  std::size_t s = 0;
  for (std::size_t c = 0; c < clip_bounds.size(); ++c) {
    // Midpoint (b + e) / 2 lies in [sb, se) iff 2 sb <= b + e < 2 se.
    const std::int64_t twice_mid = clip_bounds[c].begin + clip_bounds[c].end;
    while (s < shot_bounds.size() && 2 * shot_bounds[s].end <= twice_mid) ++s;
    if (s == shot_bounds.size()) break;
    if (2 * shot_bounds[s].begin <= twice_mid) assigned[s].push_back(c);
  }
  return assigned;
}

LabelTrack aggregate_shot_labels(const LabelTrack& frame_labels,
                                 const VideoTimeline& timeline) {
  const auto clip_labels =
      aggregate_labels(frame_labels, timeline.clip_bounds, Granularity::kClip);
  validate_tiling(timeline.shot_bounds, timeline.frame_count);
  const auto assigned =
      assign_clips_to_shots(timeline.clip_bounds, timeline.shot_bounds);
  LabelTrack out{Granularity::kShot,
                 std::vector<std::uint8_t>(timeline.shot_bounds.size())};
  for (std::size_t s = 0; s < assigned.size(); ++s) {
    if (assigned[s].empty()) {
      const Interval shot = timeline.shot_bounds[s];
      std::int64_t positives = 0;
      for (std::int64_t f = shot.begin; f < shot.end; ++f) {
        positives += frame_labels.labels[f] != 0;
      }
      out.labels[s] = 3 * positives >= shot.size() ? 1 : 0;
      continue;
    }
    std::size_t positives = 0;
    for (const auto c : assigned[s]) positives += clip_labels.labels[c];
    out.labels[s] = 3 * positives >= assigned[s].size() ? 1 : 0;
  }
  return out;
}

LabelTrack unit_labels(const LabelTrack& frame_labels,
                       const VideoTimeline& timeline, Scale scale) {
  if (static_cast<std::int64_t>(frame_labels.size()) != timeline.frame_count) {
    throw InvalidInput("frame label count " +
                       std::to_string(frame_labels.size()) +
                       " does not match timeline frame count " +
                       std::to_string(timeline.frame_count));
  }
  if (scale == Scale::kClip) {
    return aggregate_labels(frame_labels, timeline.clip_bounds,
                            Granularity::kClip);
  }
  return aggregate_shot_labels(frame_labels, timeline);
}

std::vector<std::string> align_subtitles(const SubtitleTrack& subs,
                                         std::span<const Interval> bounds,
                                         std::int64_t frame_count) {
  validate_tiling(bounds, frame_count);
  std::vector<Subtitle> entries;
  entries.reserve(subs.entries.size());
  for (const auto& s : subs.entries) {
    if (s.start_frame >= s.end_frame) {
      throw InvalidInput("subtitle with empty interval [" +
                         std::to_string(s.start_frame) + ", " +
                         std::to_string(s.end_frame) + ")");
    }
    Subtitle clamped = s;
    if (clamped.start_frame < 0 || clamped.end_frame > frame_count) {
      clamped.start_frame = std::max<std::int64_t>(0, clamped.start_frame);
      clamped.end_frame = std::min(frame_count, clamped.end_frame);
      warn("subtitle [" + std::to_string(s.start_frame) + ", " +
           std::to_string(s.end_frame) + ") clamped to the video extent");
      if (clamped.start_frame >= clamped.end_frame) continue;
    }
    entries.push_back(std::move(clamped));
  }
  std::sort(entries.begin(), entries.end(), [](const Subtitle& a, const Subtitle& b) {
    return std::tie(a.start_frame, a.end_frame, a.text) <
           std::tie(b.start_frame, b.end_frame, b.text);
  });

  std::vector<std::string> text(bounds.size());
  for (const auto& s : entries) {
    // First unit whose end lies past the subtitle start.
    auto it = std::upper_bound(bounds.begin(), bounds.end(), s.start_frame,
                               [](std::int64_t f, const Interval& u) {
                                 return f < u.end;
                               });
    for (; it != bounds.end() && it->begin < s.end_frame; ++it) {
      auto& unit_text = text[static_cast<std::size_t>(it - bounds.begin())];
      if (!unit_text.empty()) unit_text.push_back(' ');
      unit_text += s.text;
    }
  }
  return text;
}

SubtitleTrack read_subtitles_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open subtitles " + path.string());
  SubtitleTrack track;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      track.entries.push_back({j.at("start_frame").get<std::int64_t>(),
                               j.at("end_frame").get<std::int64_t>(),
                               j.at("text").get<std::string>()});
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
    const auto& s = track.entries.back();
    if (s.start_frame >= s.end_frame) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": start_frame must precede end_frame");
    }
  }
  std::stable_sort(track.entries.begin(), track.entries.end(),
                   [](const Subtitle& a, const Subtitle& b) {
                     return a.start_frame < b.start_frame;
                   });
  return track;
}

void write_subtitles_jsonl(const fs::path& path, const SubtitleTrack& subs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& s : subs.entries) {
    out << json{{"start_frame", s.start_frame},
                {"end_frame", s.end_frame},
                {"text", s.text}}
               .dump()
        << '\n';
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// "HH:MM:SS,mmm" (a '.' separator is accepted) to milliseconds.
std::int64_t parse_srt_time(const std::string& s) {
  int h = 0, m = 0, sec = 0, ms = 0;
  char sep = 0;
  if (std::sscanf(s.c_str(), "%d:%d:%d%c%d", &h, &m, &sec, &sep, &ms) != 5 ||
      (sep != ',' && sep != '.') || m >= 60 || sec >= 60 || ms >= 1000 ||
      h < 0 || m < 0 || sec < 0 || ms < 0) {
    throw FormatError("bad SRT timestamp '" + s + "'");
  }
  return ((static_cast<std::int64_t>(h) * 60 + m) * 60 + sec) * 1000 + ms;
}

std::int64_t ms_to_frame(std::int64_t ms, double fps) {
  return static_cast<std::int64_t>(
      std::floor(static_cast<double>(ms) * fps / 1000.0 + 0.5));
}

}  // namespace

SubtitleTrack parse_srt(const std::string& text, double fps) {
  if (!(fps > 0.0)) throw InvalidInput("fps must be positive");
  std::istringstream in(text);
  SubtitleTrack track;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    first = false;
    line = trim(line);
    if (line.empty()) continue;
    // Optional numeric counter line.
    if (line.find("-->") == std::string::npos) {
      if (!std::getline(in, line)) break;
      line = trim(line);
    }
    const auto arrow = line.find("-->");
    if (arrow == std::string::npos) {
      throw FormatError("SRT block without timing line: '" + line + "'");
    }
    const auto start_ms = parse_srt_time(trim(line.substr(0, arrow)));
    const auto end_ms = parse_srt_time(trim(line.substr(arrow + 3)));
    std::string body;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty()) break;
      if (!body.empty()) body.push_back(' ');
      body += line;
    }
    const auto start = ms_to_frame(start_ms, fps);
    const auto end = ms_to_frame(end_ms, fps);
    if (end <= start) {
      warn("SRT cue shorter than one frame dropped: '" + body + "'");
      continue;
    }
    track.entries.push_back({start, end, body});
  }
  std::stable_sort(track.entries.begin(), track.entries.end(),
                   [](const Subtitle& a, const Subtitle& b) {
                     return a.start_frame < b.start_frame;
                   });
  return track;
}

SubtitleTrack import_srt(const fs::path& path, double fps) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_srt(buffer.str(), fps);
}

std::vector<std::int64_t> read_shot_cuts(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open shot cuts " + path.string());
  try {
    return json::parse(in).get<std::vector<std::int64_t>>();
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_shot_cuts(const fs::path& path, std::span<const std::int64_t> cuts) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << json(std::vector<std::int64_t>(cuts.begin(), cuts.end())).dump() << '\n';
}

}  // namespace trailerness

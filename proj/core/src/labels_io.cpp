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

#include "trailerness/labels_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "trailerness/error.hpp"

namespace trailerness {

using nlohmann::json;

std::string encode_label_runs(const LabelTrack& frame_labels) {
  std::ostringstream out;
  const auto& y = frame_labels.labels;
  std::size_t start = 0;
  for (std::size_t j = 1; j <= y.size(); ++j) {
    if (j == y.size() || y[j] != y[start]) {
      out << json{{"start_frame", start},
                  {"end_frame_exclusive", j},
                  {"label", static_cast<int>(y[start])}}
                 .dump()
          << '\n';
      start = j;
    }
  }
  return out.str();
}

void write_label_runs(const std::filesystem::path& path,
                      const LabelTrack& frame_labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << encode_label_runs(frame_labels);
}

LabelTrack decode_label_runs(const std::string& text) {
  LabelTrack track{Granularity::kFrame, {}};
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::int64_t start = 0, end = 0;
    int label = 0;
    try {
      const auto j = json::parse(line);
      start = j.at("start_frame").get<std::int64_t>();
      end = j.at("end_frame_exclusive").get<std::int64_t>();
      label = j.at("label").get<int>();
    } catch (const json::exception& e) {
      throw FormatError("label run line " + std::to_string(line_no) + ": " +
                        e.what());
    }
    if (start != static_cast<std::int64_t>(track.labels.size()) ||
        end <= start || (label != 0 && label != 1)) {
      throw FormatError("label run line " + std::to_string(line_no) +
                        " is not contiguous or has an invalid label");
    }
    track.labels.insert(track.labels.end(), static_cast<std::size_t>(end - start),
                        static_cast<std::uint8_t>(label));
  }
  return track;
}

LabelTrack read_label_runs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labels " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return decode_label_runs(buffer.str());
}

}  // namespace trailerness

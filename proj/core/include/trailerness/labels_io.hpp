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

#ifndef TRAILERNESS_LABELS_IO_HPP_
#define TRAILERNESS_LABELS_IO_HPP_

#include <filesystem>
#include <string>

#include "trailerness/types.hpp"

namespace trailerness {

// Frame labels as JSON Lines, one record per run of equal labels:
//   {"start_frame": 0, "end_frame_exclusive": 120, "label": 0}
void write_label_runs(const std::filesystem::path& path,
                      const LabelTrack& frame_labels);
std::string encode_label_runs(const LabelTrack& frame_labels);

// Runs must be contiguous from frame 0 and labels must be 0 or 1.
LabelTrack read_label_runs(const std::filesystem::path& path);
LabelTrack decode_label_runs(const std::string& text);

}  // namespace trailerness

#endif  // TRAILERNESS_LABELS_IO_HPP_

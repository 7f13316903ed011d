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

#ifndef TRAILERNESS_HASHMATCH_HPP_
#define TRAILERNESS_HASHMATCH_HPP_

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "trailerness/image.hpp"
#include "trailerness/types.hpp"

namespace trailerness {

// 64-bit difference hash of one frame. Bit (row r, col c) of the 8x9 grid
// comparison lives at position 63 - (8 r + c), i.e. row-major, MSB first.
struct FrameHash {
  std::uint64_t bits = 0;

  friend bool operator==(FrameHash, FrameHash) = default;
};

inline constexpr int kDefaultTau = 10;

// Value stored by the accelerated search for entries whose true minimum
// exceeds the search radius.
inline constexpr std::uint8_t kBeyondTau = 65;

// Per episode frame, the minimum Hamming distance to any trailer frame.
using DistanceTable = std::vector<std::uint8_t>;

// Area-average downsampling to 9 columns x 8 rows followed by adjacent
// column comparison. Throws InvalidInput for rasters smaller than 9x8.
FrameHash compute_dhash(const GrayImage& image);
FrameHash compute_dhash(const RgbImage& image);

// Mean pixel value of each cell of the 9x8 grid (row-major, 72 entries).
std::vector<double> downsample_cells(const GrayImage& image);

inline int hamming(FrameHash a, FrameHash b) {
  return std::popcount(a.bits ^ b.bits);
}

std::vector<FrameHash> hash_frames(std::span<const GrayImage> frames);

// Exhaustive minimum over trailer hashes. `workers` > 1 splits episode frames
// across threads; results do not depend on the worker count.
DistanceTable min_distance_table(std::span<const FrameHash> episode,
                                 std::span<const FrameHash> trailer,
                                 unsigned workers = 1);

// Multi-index search over four 16-bit substrings. Entries <= tau are exact
// minima; anything larger is reported as kBeyondTau.
class MultiIndexHashTable {
 public:
  explicit MultiIndexHashTable(std::span<const FrameHash> database);

  // Minimum distance to the database if <= tau, else kBeyondTau.
  std::uint8_t min_distance_within(FrameHash query, int tau) const;

  std::size_t size() const { return database_.size(); }

 private:
  static constexpr int kChunks = 4;
  static constexpr std::size_t kBuckets = 1u << 16;

  std::vector<FrameHash> database_;
  // CSR layout per chunk: offsets_[k][v] .. offsets_[k][v + 1] index ids_[k].
  std::vector<std::vector<std::uint32_t>> offsets_;
  std::vector<std::vector<std::uint32_t>> ids_;
};

DistanceTable min_distance_table_mih(std::span<const FrameHash> episode,
                                     std::span<const FrameHash> trailer,
                                     int tau, unsigned workers = 1);

// Frame labels: y_j = 1 iff table[j] < tau.
LabelTrack label_frames(const DistanceTable& table, int tau);

}  // namespace trailerness

#endif  // TRAILERNESS_HASHMATCH_HPP_

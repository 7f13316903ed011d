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

#include "trailerness/hashmatch.hpp"

#include <algorithm>
#include <array>
#include <thread>

#include "trailerness/error.hpp"

namespace trailerness {

namespace {

constexpr int kGridCols = 9;
constexpr int kGridRows = 8;

// Runs fn(begin, end) over [0, n) split into `workers` contiguous ranges.
template <typename Fn>
void parallel_ranges(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, n == 0 ? 1 : n));
  if (workers == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t step = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, w * step);
    const std::size_t end = std::min(n, begin + step);
    threads.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : threads) t.join();
}

std::uint16_t chunk_of(FrameHash h, int k) {
  return static_cast<std::uint16_t>(h.bits >> (48 - 16 * k));
}

// All 16-bit masks with popcount <= 16, ordered by popcount.
const std::vector<std::uint16_t>& masks_by_weight() {
  static const std::vector<std::uint16_t> masks = [] {
    std::vector<std::uint16_t> m(1u << 16);
    for (std::uint32_t v = 0; v < m.size(); ++v) {
      m[v] = static_cast<std::uint16_t>(v);
    }
    std::stable_sort(m.begin(), m.end(), [](std::uint16_t a, std::uint16_t b) {
      return std::popcount(a) < std::popcount(b);
    });
    return m;
  }();
  return masks;
}

// Number of 16-bit masks with popcount <= r.
std::size_t masks_within(int r) {
  static const std::array<std::size_t, 17> counts = [] {
    std::array<std::size_t, 17> c{};
    std::size_t binom = 1;
    std::size_t total = 0;
    for (int i = 0; i <= 16; ++i) {
      total += binom;
      c[i] = total;
      binom = binom * (16 - i) / (i + 1);
    }
    return c;
  }();
  return counts[std::clamp(r, 0, 16)];
}

void check_tau(int tau) {
  if (tau < 0 || tau > 64) {
    throw InvalidInput("tau must lie in [0, 64], got " + std::to_string(tau));
  }
}

}  // namespace

std::vector<double> downsample_cells(const GrayImage& image) {
  if (image.width < kGridCols || image.height < kGridRows ||
      image.pixels.size() !=
          static_cast<std::size_t>(image.width) * image.height) {
    throw InvalidInput("dhash needs at least a 9x8 raster, got " +
                       std::to_string(image.width) + "x" +
                       std::to_string(image.height));
  }
  // Pixel x belongs to column floor(x * 9 / W): cells are half-open
  // intervals with real-valued edges at multiples of W / 9.
  std::array<std::uint64_t, kGridRows * kGridCols> sums{};
  std::array<std::uint64_t, kGridRows * kGridCols> counts{};
  std::vector<int> col_of(image.width);
  for (int x = 0; x < image.width; ++x) {
    col_of[x] = static_cast<int>(static_cast<std::int64_t>(x) * kGridCols /
                                 image.width);
  }
  for (int y = 0; y < image.height; ++y) {
    const int row = static_cast<int>(static_cast<std::int64_t>(y) * kGridRows /
                                     image.height);
    const std::uint8_t* line =
        image.pixels.data() + static_cast<std::size_t>(y) * image.width;
    for (int x = 0; x < image.width; ++x) {
      const int cell = row * kGridCols + col_of[x];
      sums[cell] += line[x];
      counts[cell] += 1;
    }
  }
  std::vector<double> cells(kGridRows * kGridCols);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i] = static_cast<double>(sums[i]) / static_cast<double>(counts[i]);
  }
  return cells;
}

FrameHash compute_dhash(const GrayImage& image) {
  const auto cells = downsample_cells(image);
  std::uint64_t bits = 0;
  for (int r = 0; r < kGridRows; ++r) {
    for (int c = 0; c + 1 < kGridCols; ++c) {
      bits <<= 1;
      if (cells[r * kGridCols + c] > cells[r * kGridCols + c + 1]) bits |= 1;
    }
  }
  return FrameHash{bits};
}

FrameHash compute_dhash(const RgbImage& image) {
  return compute_dhash(to_luma(image));
}

std::vector<FrameHash> hash_frames(std::span<const GrayImage> frames) {
  std::vector<FrameHash> hashes;
  hashes.reserve(frames.size());
  for (const auto& f : frames) hashes.push_back(compute_dhash(f));
  return hashes;
}

DistanceTable min_distance_table(std::span<const FrameHash> episode,
                                 std::span<const FrameHash> trailer,
                                 unsigned workers) {
  if (episode.empty() || trailer.empty()) {
    throw InvalidInput("min_distance_table: episode and trailer must be nonempty");
  }
  DistanceTable table(episode.size());
  parallel_ranges(episode.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) {
      int best = 64;
      for (const auto t : trailer) {
        best = std::min(best, hamming(episode[j], t));
        if (best == 0) break;
      }
      table[j] = static_cast<std::uint8_t>(best);
    }
  });
  return table;
}

MultiIndexHashTable::MultiIndexHashTable(std::span<const FrameHash> database)
    : database_(database.begin(), database.end()),
      offsets_(kChunks),
      ids_(kChunks) {
  if (database_.empty()) {
    throw InvalidInput("MultiIndexHashTable: empty database");
  }
  for (int k = 0; k < kChunks; ++k) {
    auto& offsets = offsets_[k];
    auto& ids = ids_[k];
    offsets.assign(kBuckets + 1, 0);
    for (const auto h : database_) ++offsets[chunk_of(h, k) + 1];
    for (std::size_t v = 0; v < kBuckets; ++v) offsets[v + 1] += offsets[v];
    ids.resize(database_.size());
    std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::uint32_t i = 0; i < database_.size(); ++i) {
      ids[cursor[chunk_of(database_[i], k)]++] = i;
    }
  }
}

std::uint8_t MultiIndexHashTable::min_distance_within(FrameHash query,
                                                      int tau) const {
  check_tau(tau);
  // Pigeonhole: a pair within tau agrees within tau / 4 on some chunk.
  const int radius = tau / kChunks;
  const std::size_t probes = masks_within(radius);
  int best = 65;
  if (probes * kChunks >= database_.size()) {
    for (const auto h : database_) {
      best = std::min(best, hamming(query, h));
      if (best == 0) break;
    }
  } else {
    const auto& masks = masks_by_weight();
    for (int k = 0; k < kChunks && best > 0; ++k) {
      const std::uint16_t q = chunk_of(query, k);
      for (std::size_t m = 0; m < probes; ++m) {
        const std::uint16_t v = q ^ masks[m];
        for (std::uint32_t p = offsets_[k][v]; p < offsets_[k][v + 1]; ++p) {
          best = std::min(best, hamming(query, database_[ids_[k][p]]));
        }
        if (best == 0) break;
      }
    }
  }
  return best <= tau ? static_cast<std::uint8_t>(best) : kBeyondTau;
}

DistanceTable min_distance_table_mih(std::span<const FrameHash> episode,
                                     std::span<const FrameHash> trailer,
                                     int tau, unsigned workers) {
  check_tau(tau);
  if (episode.empty() || trailer.empty()) {
    throw InvalidInput(
        "min_distance_table_mih: episode and trailer must be nonempty");
  }
  const MultiIndexHashTable index(trailer);
  DistanceTable table(episode.size());
  parallel_ranges(episode.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) {
      table[j] = index.min_distance_within(episode[j], tau);
    }
  });
  return table;
}

LabelTrack label_frames(const DistanceTable& table, int tau) {
  check_tau(tau);
  LabelTrack track{Granularity::kFrame, std::vector<std::uint8_t>(table.size())};
  for (std::size_t j = 0; j < table.size(); ++j) {
    if (table[j] > kBeyondTau) {
      throw InvalidInput("distance table entry out of range at frame " +
                         std::to_string(j));
    }
    track.labels[j] = table[j] < tau ? 1 : 0;
  }
  return track;
}

}  // namespace trailerness

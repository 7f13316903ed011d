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

#ifndef TRAILERNESS_IMAGE_HPP_
#define TRAILERNESS_IMAGE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace trailerness {

// 8-bit single channel raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  bool empty() const { return width <= 0 || height <= 0; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

// 8-bit interleaved RGB raster, row-major.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 3 bytes per pixel
};

// luma = round(0.299 R + 0.587 G + 0.114 B)
GrayImage to_luma(const RgbImage& image);

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

// Reads gray, gray+alpha, RGB or RGBA 8/16-bit PNGs; color is converted to
// luma and alpha is dropped.
GrayImage read_png(const std::filesystem::path& path);

// Dispatches on extension (.pgm / .png).
GrayImage read_frame(const std::filesystem::path& path);

// Files named frame_<digits>.pgm or frame_<digits>.png in lexicographic
// filename order.
std::vector<std::filesystem::path> list_frame_files(
    const std::filesystem::path& directory);

std::vector<GrayImage> read_frame_directory(
    const std::filesystem::path& directory);

// Writes frames as frame_%08d.pgm.
void write_frame_directory(const std::filesystem::path& directory,
                           std::span<const GrayImage> frames);

}  // namespace trailerness

#endif  // TRAILERNESS_IMAGE_HPP_

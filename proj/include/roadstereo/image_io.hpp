#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "roadstereo/image.hpp"

namespace roadstereo {

// Reads binary PGM (P5, 8 or 16 bit) or PNG (8-bit gray, gray+alpha, RGB,
// RGBA). Color is converted to luma with Rec. 601 weights.
GrayImage load_image(const std::filesystem::path& path);

// Writes an 8-bit binary PGM, rounding and clamping to [0, 255].
void save_pgm(const std::filesystem::path& path, const GrayImage& img);

// 16-bit grayscale PNG round trip, used for KITTI-style disparity maps.
struct Raster16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> data;
};
void save_png16(const std::filesystem::path& path, const Raster16& raster);
Raster16 load_png16(const std::filesystem::path& path);

}  // namespace roadstereo

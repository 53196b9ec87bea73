#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

namespace roadstereo {

// f(d) = b0 + b1 d + b2 d^2 fitted through the correlation costs around the
// integer disparity. Opens downward wherever it is set.
struct Parabola {
  double b0 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;

  double operator()(double d) const { return b0 + d * (b1 + d * b2); }
  double vertex() const { return -b1 / (2.0 * b2); }
  // f_shifted(x) = f(x - shift)
  Parabola shifted(double shift) const;
};

// Unique parabola through (d-1, c_minus), (d, c_center), (d+1, c_plus).
Parabola parabola_through(int d, double c_minus, double c_center,
                          double c_plus);

// Dense per-pixel disparity state carried through the matching pipeline.
//
// d_int is the integer-stage disparity in the matching domain. d is the
// current value (integer at the propagation stage, subpixel afterwards),
// measured in the same domain plus row_offset[v]. row_offset is zero until
// the perspective shift is undone.
struct DisparityField {
  static constexpr double kUnknown = std::numeric_limits<double>::quiet_NaN();

  int width = 0;
  int height = 0;
  std::vector<double> d;
  std::vector<int> d_int;
  std::vector<std::uint8_t> valid;
  // c(d_int - 1), c(d_int), c(d_int + 1); NaN when not evaluated.
  std::vector<std::array<double, 3>> costs;
  std::vector<Parabola> parabola;
  std::vector<std::uint8_t> has_parabola;
  std::vector<double> row_offset;

  DisparityField() = default;
  DisparityField(int width, int height);

  std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v) * width + u;
  }
  bool in_bounds(int u, int v) const noexcept {
    return u >= 0 && v >= 0 && u < width && v < height;
  }
  bool is_valid(int u, int v) const { return valid[index(u, v)] != 0; }
  void invalidate(std::size_t i);

  std::size_t count_valid() const;
  // Mean of the winning correlation c(d_int) over valid pixels.
  double mean_winning_cost() const;
};

DisparityField flip_horizontal(const DisparityField& field);

// Lossless float stream: ASCII header "DSP1 <width> <height>\n" followed by
// width*height little-endian float32 values, row-major. Invalid = NaN.
void save_dsp1(const std::filesystem::path& path, const DisparityField& field);
DisparityField load_dsp1(const std::filesystem::path& path);
void save_dsp1(const std::filesystem::path& path, int width, int height,
               const std::vector<float>& values);

// KITTI disparity convention: uint16 value = round(256 d), 0 = invalid.
// Disparities that do not fit in 16 bits are written as invalid; the number
// of such pixels is returned.
std::size_t save_disparity_png(const std::filesystem::path& path,
                               const DisparityField& field);
DisparityField load_disparity_png(const std::filesystem::path& path);

// Reads either format, chosen by extension (.png or anything else = DSP1).
DisparityField load_disparity(const std::filesystem::path& path);

// 8-bit mask, 255 = valid.
void save_mask_pgm(const std::filesystem::path& path,
                   const DisparityField& field);

}  // namespace roadstereo

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace roadstereo {

// Row-major single-channel raster with real-valued intensities in [0, 255].
// An optional per-pixel validity mask marks samples that carry no data
// (e.g. pixels shifted in from outside the frame by a warp).
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(int u, int v) const { return data_[index(u, v)]; }
  double& operator()(int u, int v) { return data_[index(u, v)]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> row(int v) const {
    return {data_.data() + static_cast<std::size_t>(v) * width_,
            static_cast<std::size_t>(width_)};
  }

  bool has_mask() const noexcept { return !mask_.empty(); }
  bool valid(int u, int v) const {
    return mask_.empty() || mask_[index(u, v)] != 0;
  }
  void set_valid(int u, int v, bool valid);
  std::span<const std::uint8_t> mask() const noexcept { return mask_; }

  std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v) * width_ + u;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
  std::vector<std::uint8_t> mask_;
};

// Mirror image around the vertical axis; the mask follows the data.
GrayImage flip_horizontal(const GrayImage& img);

// Per-pixel mean and population standard deviation of the (2rho+1)^2 block
// centered at each pixel. Pixels within rho of the border, and pixels whose
// block touches an invalid sample, are undefined.
struct BlockStats {
  int width = 0;
  int height = 0;
  int rho = 0;
  std::vector<double> mu;
  std::vector<double> sigma;
  std::vector<std::uint8_t> defined;

  std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v) * width + u;
  }
  bool is_defined(int u, int v) const {
    return u >= 0 && v >= 0 && u < width && v < height &&
           defined[index(u, v)] != 0;
  }
  double mean(int u, int v) const { return mu[index(u, v)]; }
  double stddev(int u, int v) const { return sigma[index(u, v)]; }
  int block_size() const noexcept { return (2 * rho + 1) * (2 * rho + 1); }
};

BlockStats compute_block_stats(const GrayImage& img, int rho);

}  // namespace roadstereo

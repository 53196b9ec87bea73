#include "roadstereo/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roadstereo/error.hpp"

namespace roadstereo {

namespace {

void check_size(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "image dimensions must be positive, got " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
}

}  // namespace

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height) {
  check_size(width, height);
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_size(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorKind::kInvalidArgument,
                "image data length does not match width x height");
  }
}

void GrayImage::set_valid(int u, int v, bool valid) {
  if (mask_.empty()) {
    if (valid) return;
    mask_.assign(data_.size(), 1);
  }
  mask_[index(u, v)] = valid ? 1 : 0;
}

GrayImage flip_horizontal(const GrayImage& img) {
  GrayImage out(img.width(), img.height());
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < img.width(); ++u) {
      const int src = img.width() - 1 - u;
      out(u, v) = img(src, v);
      if (!img.valid(src, v)) out.set_valid(u, v, false);
    }
  }
  return out;
}

// Horizontal window sums come from per-row prefix sums, vertical sums are
// accumulated directly over 2rho+1 rows. Rounding error stays bounded by a
// single row rather than by the whole image.
BlockStats compute_block_stats(const GrayImage& img, int rho) {
  const int w = img.width();
  const int h = img.height();
  if (rho < 0 || 2 * rho + 1 > std::min(w, h)) {
    throw Error(ErrorKind::kInvalidArgument,
                "rho too large for image: 2*" + std::to_string(rho) +
                    "+1 > min(" + std::to_string(w) + ", " +
                    std::to_string(h) + ")");
  }

  BlockStats stats;
  stats.width = w;
  stats.height = h;
  stats.rho = rho;
  const std::size_t total = static_cast<std::size_t>(w) * h;
  stats.mu.assign(total, 0.0);
  stats.sigma.assign(total, 0.0);
  stats.defined.assign(total, 0);

  const int side = 2 * rho + 1;
  const double n = static_cast<double>(side) * side;

  // Horizontal window sums for every row, centered at u in [rho, w - rho).
  std::vector<double> hsum(total, 0.0), hsq(total, 0.0);
  std::vector<int> hbad(total, 0);
  std::vector<double> prefix(w + 1), prefix_sq(w + 1);
  std::vector<int> prefix_bad(w + 1);
  for (int v = 0; v < h; ++v) {
    prefix[0] = prefix_sq[0] = 0.0;
    prefix_bad[0] = 0;
    for (int u = 0; u < w; ++u) {
      const double x = img(u, v);
      prefix[u + 1] = prefix[u] + x;
      prefix_sq[u + 1] = prefix_sq[u] + x * x;
      prefix_bad[u + 1] = prefix_bad[u] + (img.valid(u, v) ? 0 : 1);
    }
    for (int u = rho; u < w - rho; ++u) {
      const std::size_t i = img.index(u, v);
      hsum[i] = prefix[u + rho + 1] - prefix[u - rho];
      hsq[i] = prefix_sq[u + rho + 1] - prefix_sq[u - rho];
      hbad[i] = prefix_bad[u + rho + 1] - prefix_bad[u - rho];
    }
  }

  for (int v = rho; v < h - rho; ++v) {
    for (int u = rho; u < w - rho; ++u) {
      double s = 0.0, sq = 0.0;
      int bad = 0;
      for (int y = v - rho; y <= v + rho; ++y) {
        const std::size_t j = img.index(u, y);
        s += hsum[j];
        sq += hsq[j];
        bad += hbad[j];
      }
      if (bad != 0) continue;
      const std::size_t i = img.index(u, v);
      const double mean = s / n;
      double var = sq / n - mean * mean;
      // Cancellation noise on flat blocks.
      if (var <= 1e-12 * (mean * mean + 1.0)) var = 0.0;
      stats.mu[i] = mean;
      stats.sigma[i] = std::sqrt(var);
      stats.defined[i] = 1;
    }
  }
  return stats;
}

}  // namespace roadstereo

#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "roadstereo/image.hpp"
#include "roadstereo/synth.hpp"

namespace testing {

inline roadstereo::GrayImage random_image(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 255.0);
  roadstereo::GrayImage img(w, h);
  for (auto& x : img.data()) x = dist(rng);
  return img;
}

// Uniform noise blurred by a 3x3 box, so shifted copies stay discriminative
// but neighbours correlate a little.
inline roadstereo::GrayImage textured_image(int w, int h, unsigned seed) {
  const auto raw = random_image(w + 2, h + 2, seed);
  roadstereo::GrayImage img(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      double s = 0.0;
      for (int dv = 0; dv < 3; ++dv)
        for (int du = 0; du < 3; ++du) s += raw(u + du, v + dv);
      img(u, v) = s / 9.0;
    }
  }
  return img;
}

// right(x) = left(x + d): left pixel u matches right pixel u - d.
inline roadstereo::GrayImage shifted_left(const roadstereo::GrayImage& left,
                                          int d, unsigned seed = 99) {
  const auto fill = textured_image(left.width(), left.height(), seed);
  roadstereo::GrayImage right(left.width(), left.height());
  for (int v = 0; v < left.height(); ++v) {
    for (int u = 0; u < left.width(); ++u) {
      const int x = u + d;
      right(u, v) = x < left.width() ? left(x, v) : fill(u, v);
    }
  }
  return right;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("roadstereo_test_" + name);
  std::filesystem::create_directories(dir);
  return dir;
}

// Desk scenes are deterministic and take a fraction of a second to render;
// share them across test cases.
inline const roadstereo::RenderedPair& scene(roadstereo::ScenePreset p) {
  static roadstereo::RenderedPair cache[3] = {
      roadstereo::render(roadstereo::desk_scene(roadstereo::ScenePreset::kPlane)),
      roadstereo::render(roadstereo::desk_scene(roadstereo::ScenePreset::kSlab)),
      roadstereo::render(roadstereo::desk_scene(roadstereo::ScenePreset::kGroove))};
  return cache[static_cast<int>(p)];
}

}  // namespace testing

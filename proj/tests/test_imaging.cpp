#include <doctest.h>
#include <png.h>

#include <cmath>
#include <fstream>

#include "helpers.hpp"
#include "roadstereo/error.hpp"
#include "roadstereo/image.hpp"
#include "roadstereo/image_io.hpp"

using namespace roadstereo;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

// Direct summation over one block.
std::pair<double, double> brute_stats(const GrayImage& img, int u, int v, int rho) {
  double sum = 0.0;
  const int n = (2 * rho + 1) * (2 * rho + 1);
  for (int y = v - rho; y <= v + rho; ++y)
    for (int x = u - rho; x <= u + rho; ++x) sum += img(x, y);
  const double mu = sum / n;
  double ss = 0.0;
  for (int y = v - rho; y <= v + rho; ++y)
    for (int x = u - rho; x <= u + rho; ++x) ss += (img(x, y) - mu) * (img(x, y) - mu);
  return {mu, std::sqrt(ss / n)};
}

}  // namespace

TEST_CASE("load_image decodes a 2x2 PGM byte for byte") {
  const auto dir = testing::temp_dir("imaging");
  std::string bytes = "P5\n# comment\n2 2\n255\n";
  bytes += std::string{'\x00', '\xff', '\x80', '\x40'};
  write_bytes(dir / "tiny.pgm", bytes);
  const GrayImage img = load_image(dir / "tiny.pgm");
  REQUIRE(img.width() == 2);
  REQUIRE(img.height() == 2);
  CHECK(img(0, 0) == 0.0);
  CHECK(img(1, 0) == 255.0);
  CHECK(img(0, 1) == 128.0);
  CHECK(img(1, 1) == 64.0);
}

TEST_CASE("load_image passes gray color pixels through as luma") {
  const auto dir = testing::temp_dir("imaging");
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = 3;
  image.height = 2;
  image.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> rgb(3 * 2 * 3, 200);
  rgb[0] = 255, rgb[1] = 0, rgb[2] = 0;  // one pure red pixel
  REQUIRE(png_image_write_to_file(&image, (dir / "color.png").string().c_str(),
                                  0, rgb.data(), 0, nullptr));
  const GrayImage img = load_image(dir / "color.png");
  REQUIRE(img.width() == 3);
  CHECK(img(1, 0) == doctest::Approx(200.0));
  CHECK(img(2, 1) == doctest::Approx(200.0));
  CHECK(img(0, 0) == doctest::Approx(0.299 * 255.0).epsilon(0.01));
}

TEST_CASE("load_image rejects truncated, unknown and empty inputs") {
  const auto dir = testing::temp_dir("imaging");
  write_bytes(dir / "trunc.pgm", "P5\n4 4\n255\n\x01\x02");
  CHECK_THROWS_WITH_AS(load_image(dir / "trunc.pgm"),
                       doctest::Contains("unreadable file"), Error);
  write_bytes(dir / "junk.bin", "hello world");
  CHECK_THROWS_WITH_AS(load_image(dir / "junk.bin"),
                       doctest::Contains("unsupported format"), Error);
  write_bytes(dir / "zero.pgm", "P5\n0 4\n255\n");
  CHECK_THROWS_WITH_AS(load_image(dir / "zero.pgm"),
                       doctest::Contains("zero-sized image"), Error);
  CHECK_THROWS_WITH_AS(load_image(dir / "missing.pgm"),
                       doctest::Contains("unreadable file"), Error);
}

TEST_CASE("save_pgm round trips integer images") {
  const auto dir = testing::temp_dir("imaging");
  GrayImage img(5, 3);
  for (int i = 0; i < 15; ++i) img.data()[i] = i * 17;
  save_pgm(dir / "rt.pgm", img);
  const GrayImage back = load_image(dir / "rt.pgm");
  for (int i = 0; i < 15; ++i) CHECK(back.data()[i] == img.data()[i]);
}

TEST_CASE("16-bit PNG round trip") {
  const auto dir = testing::temp_dir("imaging");
  Raster16 r{4, 2, {0, 1, 255, 256, 1000, 40000, 65535, 7}};
  save_png16(dir / "r16.png", r);
  const Raster16 back = load_png16(dir / "r16.png");
  CHECK(back.width == 4);
  CHECK(back.data == r.data);
}

TEST_CASE("block stats of a constant image") {
  const GrayImage img(7, 6, 100.0);
  const BlockStats s = compute_block_stats(img, 1);
  for (int v = 1; v < 5; ++v) {
    for (int u = 1; u < 6; ++u) {
      REQUIRE(s.is_defined(u, v));
      CHECK(s.mean(u, v) == doctest::Approx(100.0));
      CHECK(s.stddev(u, v) == 0.0);
    }
  }
  CHECK_FALSE(s.is_defined(0, 0));
  CHECK_FALSE(s.is_defined(6, 3));
}

TEST_CASE("block stats of a single bright pixel") {
  GrayImage img(3, 3, 0.0);
  img(1, 1) = 9.0;
  const BlockStats s = compute_block_stats(img, 1);
  REQUIRE(s.is_defined(1, 1));
  CHECK(s.mean(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.stddev(1, 1) == doctest::Approx(std::sqrt(8.0)).epsilon(1e-12));
}

TEST_CASE("block stats match brute force on a random image") {
  const GrayImage img = testing::random_image(32, 32, 5);
  const int rho = 3;
  const BlockStats s = compute_block_stats(img, rho);
  for (int v = rho; v < 32 - rho; ++v) {
    for (int u = rho; u < 32 - rho; ++u) {
      const auto [mu, sigma] = brute_stats(img, u, v, rho);
      CHECK(std::abs(s.mean(u, v) - mu) < 1e-9);
      CHECK(std::abs(s.stddev(u, v) - sigma) < 1e-9);
      // sigma^2 = E[x^2] - E[x]^2
      double sq = 0.0;
      for (int y = v - rho; y <= v + rho; ++y)
        for (int x = u - rho; x <= u + rho; ++x) sq += img(x, y) * img(x, y);
      const double var = sq / s.block_size() - mu * mu;
      CHECK(std::abs(s.stddev(u, v) * s.stddev(u, v) - var) <= 1e-9 * var);
    }
  }
}

TEST_CASE("block stats are deterministic and reject oversized blocks") {
  const GrayImage img = testing::random_image(20, 12, 8);
  const BlockStats a = compute_block_stats(img, 2);
  const BlockStats b = compute_block_stats(img, 2);
  CHECK(a.mu == b.mu);
  CHECK(a.sigma == b.sigma);
  CHECK_THROWS_WITH_AS(compute_block_stats(img, 6),
                       doctest::Contains("rho too large for image"), Error);
}

TEST_CASE("invalid samples make the covering blocks undefined") {
  GrayImage img = testing::random_image(9, 9, 1);
  img.set_valid(4, 4, false);
  const BlockStats s = compute_block_stats(img, 1);
  CHECK_FALSE(s.is_defined(4, 4));
  CHECK_FALSE(s.is_defined(3, 5));
  CHECK(s.is_defined(2, 2));
  CHECK(s.is_defined(6, 6));
}

TEST_CASE("flip_horizontal mirrors data and mask") {
  GrayImage img(3, 1);
  img(0, 0) = 1, img(1, 0) = 2, img(2, 0) = 3;
  img.set_valid(0, 0, false);
  const GrayImage f = flip_horizontal(img);
  CHECK(f(0, 0) == 3);
  CHECK(f(2, 0) == 1);
  CHECK_FALSE(f.valid(2, 0));
  CHECK(f.valid(0, 0));
}

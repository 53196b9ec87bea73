#include "roadstereo/disparity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "roadstereo/error.hpp"
#include "roadstereo/image_io.hpp"

namespace roadstereo {

Parabola Parabola::shifted(double shift) const {
  // b0 + b1 (x - s) + b2 (x - s)^2
  return {b0 - b1 * shift + b2 * shift * shift, b1 - 2.0 * b2 * shift, b2};
}

Parabola parabola_through(int d, double c_minus, double c_center,
                          double c_plus) {
  const double a = 0.5 * (c_minus + c_plus) - c_center;
  const double slope = 0.5 * (c_plus - c_minus);
  const double x = d;
  return {c_center - slope * x + a * x * x, slope - 2.0 * a * x, a};
}

DisparityField::DisparityField(int width_, int height_)
    : width(width_), height(height_) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "disparity field dimensions must be positive");
  }
  const std::size_t n = static_cast<std::size_t>(width) * height;
  d.assign(n, 0.0);
  d_int.assign(n, 0);
  valid.assign(n, 0);
  costs.assign(n, {kUnknown, kUnknown, kUnknown});
  parabola.assign(n, Parabola{});
  has_parabola.assign(n, 0);
  row_offset.assign(height, 0.0);
}

void DisparityField::invalidate(std::size_t i) {
  valid[i] = 0;
  has_parabola[i] = 0;
}

std::size_t DisparityField::count_valid() const {
  return static_cast<std::size_t>(
      std::count_if(valid.begin(), valid.end(), [](auto x) { return x != 0; }));
}

double DisparityField::mean_winning_cost() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < valid.size(); ++i) {
    if (valid[i] && !std::isnan(costs[i][1])) {
      sum += costs[i][1];
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

DisparityField flip_horizontal(const DisparityField& field) {
  DisparityField out = field;
  for (int v = 0; v < field.height; ++v) {
    for (int u = 0; u < field.width; ++u) {
      const std::size_t dst = out.index(u, v);
      const std::size_t src = field.index(field.width - 1 - u, v);
      out.d[dst] = field.d[src];
      out.d_int[dst] = field.d_int[src];
      out.valid[dst] = field.valid[src];
      out.costs[dst] = field.costs[src];
      out.parabola[dst] = field.parabola[src];
      out.has_parabola[dst] = field.has_parabola[src];
    }
  }
  return out;
}

namespace {

void write_float_le(std::ostream& out, float value) {
  auto bits = std::bit_cast<std::uint32_t>(value);
  unsigned char bytes[4] = {
      static_cast<unsigned char>(bits & 0xFF),
      static_cast<unsigned char>((bits >> 8) & 0xFF),
      static_cast<unsigned char>((bits >> 16) & 0xFF),
      static_cast<unsigned char>((bits >> 24) & 0xFF)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

}  // namespace

void save_dsp1(const std::filesystem::path& path, int width, int height,
               const std::vector<float>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << "DSP1 " << width << " " << height << "\n";
  for (float x : values) write_float_le(out, x);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

void save_dsp1(const std::filesystem::path& path, const DisparityField& field) {
  std::vector<float> values(field.d.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = field.valid[i] ? static_cast<float>(field.d[i])
                               : std::numeric_limits<float>::quiet_NaN();
  }
  save_dsp1(path, field.width, field.height, values);
}

DisparityField load_dsp1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "unreadable file: " + path.string());
  std::string header;
  if (!std::getline(in, header)) {
    throw Error(ErrorKind::kIo, "unreadable file: " + path.string());
  }
  std::istringstream hs(header);
  std::string magic;
  int width = 0, height = 0;
  if (!(hs >> magic >> width >> height) || magic != "DSP1") {
    throw Error(ErrorKind::kIo, "unsupported format: not a DSP1 stream " +
                                    path.string());
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::kIo, "zero-sized image: " + path.string());
  }
  DisparityField field(width, height);
  const std::size_t n = field.d.size();
  std::vector<unsigned char> raw(4 * n);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw Error(ErrorKind::kIo, "unreadable file: truncated DSP1 " +
                                    path.string());
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t bits = raw[4 * i] | (raw[4 * i + 1] << 8) |
                               (raw[4 * i + 2] << 16) |
                               (static_cast<std::uint32_t>(raw[4 * i + 3]) << 24);
    const float x = std::bit_cast<float>(bits);
    if (std::isnan(x)) continue;
    field.d[i] = x;
    field.d_int[i] = static_cast<int>(std::lround(x));
    field.valid[i] = 1;
  }
  return field;
}

std::size_t save_disparity_png(const std::filesystem::path& path,
                               const DisparityField& field) {
  Raster16 raster;
  raster.width = field.width;
  raster.height = field.height;
  raster.data.assign(field.d.size(), 0);
  std::size_t overflow = 0;
  for (std::size_t i = 0; i < field.d.size(); ++i) {
    if (!field.valid[i]) continue;
    const long value = std::lround(256.0 * field.d[i]);
    if (value <= 0 || value > 65535) {
      ++overflow;
      continue;
    }
    raster.data[i] = static_cast<std::uint16_t>(value);
  }
  save_png16(path, raster);
  return overflow;
}

DisparityField load_disparity_png(const std::filesystem::path& path) {
  const Raster16 raster = load_png16(path);
  DisparityField field(raster.width, raster.height);
  for (std::size_t i = 0; i < raster.data.size(); ++i) {
    if (raster.data[i] == 0) continue;
    field.d[i] = raster.data[i] / 256.0;
    field.d_int[i] = static_cast<int>(std::lround(field.d[i]));
    field.valid[i] = 1;
  }
  return field;
}

DisparityField load_disparity(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" ? load_disparity_png(path) : load_dsp1(path);
}

void save_mask_pgm(const std::filesystem::path& path,
                   const DisparityField& field) {
  GrayImage mask(field.width, field.height);
  for (std::size_t i = 0; i < field.valid.size(); ++i) {
    mask.data()[i] = field.valid[i] ? 255.0 : 0.0;
  }
  save_pgm(path, mask);
}

}  // namespace roadstereo

#include "roadstereo/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "roadstereo/error.hpp"

namespace roadstereo {

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kIo, "unreadable file: " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Skips whitespace and '#' comments, then parses one unsigned integer.
std::size_t pnm_token(const std::vector<unsigned char>& bytes, std::size_t pos,
                      long& value) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
    return std::string::npos;
  }
  value = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    value = value * 10 + (bytes[pos] - '0');
    if (value > (1L << 30)) return std::string::npos;
    ++pos;
  }
  return pos;
}

GrayImage decode_pgm(const std::vector<unsigned char>& bytes,
                     const std::filesystem::path& path) {
  long width = 0, height = 0, maxval = 0;
  std::size_t pos = 2;
  pos = pnm_token(bytes, pos, width);
  if (pos != std::string::npos) pos = pnm_token(bytes, pos, height);
  if (pos != std::string::npos) pos = pnm_token(bytes, pos, maxval);
  if (pos == std::string::npos || pos >= bytes.size() ||
      !std::isspace(bytes[pos])) {
    throw Error(ErrorKind::kIo, "unreadable file: bad PGM header in " +
                                    path.string());
  }
  ++pos;  // single whitespace before the raster
  if (width == 0 || height == 0) {
    throw Error(ErrorKind::kIo, "zero-sized image: " + path.string());
  }
  if (maxval <= 0 || maxval > 65535) {
    throw Error(ErrorKind::kIo, "unsupported format: PGM maxval " +
                                    std::to_string(maxval));
  }
  const std::size_t bpp = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (bytes.size() - pos < count * bpp) {
    throw Error(ErrorKind::kIo, "unreadable file: truncated PGM " +
                                    path.string());
  }
  std::vector<double> data(count);
  const double scale = 255.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < count; ++i) {
    double raw = bpp == 1 ? bytes[pos + i]
                          : (bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1];
    data[i] = maxval == 255 ? raw : raw * scale;
  }
  return GrayImage(static_cast<int>(width), static_cast<int>(height),
                   std::move(data));
}

GrayImage decode_png(const std::vector<unsigned char>& bytes,
                     const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorKind::kIo, "unreadable file: " + path.string() + ": " +
                                    image.message);
  }
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw Error(ErrorKind::kIo, "zero-sized image: " + path.string());
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw Error(ErrorKind::kIo,
                "unsupported format: 16-bit PNG intensity image " +
                    path.string());
  }
  image.format = PNG_FORMAT_RGBA;
  std::vector<png_byte> rgba(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
    throw Error(ErrorKind::kIo, "unreadable file: " + path.string() + ": " +
                                    image.message);
  }
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  std::vector<double> data(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const png_byte* px = &rgba[4 * i];
    if (px[0] == px[1] && px[1] == px[2]) {
      data[i] = px[0];
    } else {
      data[i] = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
    }
  }
  return GrayImage(w, h, std::move(data));
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
    return decode_pgm(bytes, path);
  }
  static constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G',
                                               0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) {
    return decode_png(bytes, path);
  }
  if (bytes.empty()) {
    throw Error(ErrorKind::kIo, "unreadable file: empty " + path.string());
  }
  throw Error(ErrorKind::kIo, "unsupported format: " + path.string());
}

void save_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<unsigned char> raster(img.data().size());
  std::transform(img.data().begin(), img.data().end(), raster.begin(),
                 [](double x) {
                   return static_cast<unsigned char>(
                       std::clamp(std::lround(x), 0L, 255L));
                 });
  out.write(reinterpret_cast<const char*>(raster.data()),
            static_cast<std::streamsize>(raster.size()));
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

void save_png16(const std::filesystem::path& path, const Raster16& raster) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width);
  image.height = static_cast<png_uint_32>(raster.height);
  image.format = PNG_FORMAT_LINEAR_Y;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0,
                               raster.data.data(), 0, nullptr)) {
    throw Error(ErrorKind::kIo, "cannot write " + path.string() + ": " +
                                    image.message);
  }
}

Raster16 load_png16(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorKind::kIo, "unreadable file: " + path.string() + ": " +
                                    image.message);
  }
  if (!(image.format & PNG_FORMAT_FLAG_LINEAR) ||
      (image.format & PNG_FORMAT_FLAG_COLOR)) {
    png_image_free(&image);
    throw Error(ErrorKind::kIo,
                "unsupported format: expected 16-bit grayscale PNG " +
                    path.string());
  }
  image.format = PNG_FORMAT_LINEAR_Y;
  Raster16 raster;
  raster.width = static_cast<int>(image.width);
  raster.height = static_cast<int>(image.height);
  raster.data.resize(static_cast<std::size_t>(raster.width) * raster.height);
  if (!png_image_finish_read(&image, nullptr, raster.data.data(), 0,
                             nullptr)) {
    throw Error(ErrorKind::kIo, "unreadable file: " + path.string() + ": " +
                                    image.message);
  }
  return raster;
}

}  // namespace roadstereo

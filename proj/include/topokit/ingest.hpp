#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "topokit/errors.hpp"
#include "topokit/pointcloud.hpp"
#include "topokit/rng.hpp"

namespace topokit {

// A stack of equally sized single-channel 8-bit images, row-major per image.
struct ImageSet {
  std::size_t count = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;

  std::size_t image_size() const { return height * width; }
  std::uint8_t at(std::size_t image, std::size_t row, std::size_t col) const {
    return pixels[image * image_size() + row * width + col];
  }

  friend bool operator==(const ImageSet&, const ImageSet&) = default;
};

/* **************************************************************************
 * IDX files (unsigned byte, three dimensions)
 * *************************************************************************/

class IdxError : public IoError {
public:
  enum class Kind { TruncatedHeader, BadMagic, BadDimensionCount, TruncatedPayload };

  IdxError(Kind kind, const std::string& what) : IoError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

namespace detail {

inline std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

inline void write_be32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  out.write(b, 4);
}

}  // namespace detail

inline ImageSet parse_idx(const std::vector<std::uint8_t>& bytes) {
  using K = IdxError::Kind;
  if (bytes.size() < 4) throw IdxError(K::TruncatedHeader, "IDX: file shorter than the magic number");
  if (bytes[0] != 0 || bytes[1] != 0 || bytes[2] != 0x08)
    throw IdxError(K::BadMagic, "IDX: magic number is not an unsigned-byte tensor");
  if (bytes[3] != 3)
    throw IdxError(K::BadDimensionCount, "IDX: expected 3 dimensions, found " + std::to_string(bytes[3]));
  if (bytes.size() < 16) throw IdxError(K::TruncatedHeader, "IDX: header shorter than 16 bytes");
  ImageSet s;
  s.count = detail::read_be32(bytes.data() + 4);
  s.height = detail::read_be32(bytes.data() + 8);
  s.width = detail::read_be32(bytes.data() + 12);
  const std::size_t need = s.count * s.height * s.width;
  if (bytes.size() - 16 < need)
    throw IdxError(K::TruncatedPayload, "IDX: payload has " + std::to_string(bytes.size() - 16) + " bytes, header declares " +
                                            std::to_string(need));
  s.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(need));
  return s;
}

inline ImageSet read_idx(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_idx(bytes);
}

inline void write_idx(std::ostream& out, const ImageSet& s) {
  out.write("\x00\x00\x08\x03", 4);
  detail::write_be32(out, static_cast<std::uint32_t>(s.count));
  detail::write_be32(out, static_cast<std::uint32_t>(s.height));
  detail::write_be32(out, static_cast<std::uint32_t>(s.width));
  out.write(reinterpret_cast<const char*>(s.pixels.data()), static_cast<std::streamsize>(s.pixels.size()));
}

inline void write_idx(const std::string& path, const ImageSet& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_idx(out, s);
  if (!out) throw IoError("write failed: " + path);
}

/* **************************************************************************
 * Image sets to point clouds
 * *************************************************************************/

enum class CropRegion { Center, CornerTopLeft };

struct CropSpec {
  CropRegion region = CropRegion::Center;
  std::size_t size = 10;
};

// k distinct indices from [0, count), in draw order (partial Fisher-Yates).
inline std::vector<std::size_t> sample_without_replacement(std::size_t count, std::size_t k, Rng& rng) {
  if (k > count)
    throw std::invalid_argument("cannot sample " + std::to_string(k) + " of " + std::to_string(count) + " images");
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(count - i)]);
  idx.resize(k);
  return idx;
}

// Selected images scaled to [0, 1] with additive Gaussian pixel noise.
struct NoisyImages {
  std::size_t count = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;
};

inline NoisyImages add_noise(const ImageSet& images, std::span<const std::size_t> chosen, double noise_sd, Rng& rng) {
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be >= 0");
  NoisyImages out{chosen.size(), images.height, images.width, {}};
  out.pixels.reserve(chosen.size() * images.image_size());
  for (std::size_t idx : chosen) {
    if (idx >= images.count) throw std::invalid_argument("image index out of range");
    for (std::size_t p = 0; p < images.image_size(); ++p) {
      double v = images.pixels[idx * images.image_size() + p] / 255.0;
      if (noise_sd > 0.0) v += rng.normal(0.0, noise_sd);
      out.pixels.push_back(v);
    }
  }
  return out;
}

// One size^2-dimensional point per image, row-major within the crop. The
// center crop starts at ((h - size) / 2, (w - size) / 2), rounded down.
inline PointCloud crop(const NoisyImages& images, const CropSpec& spec) {
  if (spec.size < 1) throw std::invalid_argument("crop size must be >= 1");
  if (spec.size > images.height || spec.size > images.width)
    throw std::invalid_argument("crop of size " + std::to_string(spec.size) + " exceeds image bounds " +
                                std::to_string(images.height) + "x" + std::to_string(images.width));
  if (images.count == 0) throw std::invalid_argument("no images selected");
  const std::size_t top = spec.region == CropRegion::Center ? (images.height - spec.size) / 2 : 0;
  const std::size_t left = spec.region == CropRegion::Center ? (images.width - spec.size) / 2 : 0;
  const std::size_t plane = images.height * images.width;
  std::vector<double> coords;
  coords.reserve(images.count * spec.size * spec.size);
  for (std::size_t i = 0; i < images.count; ++i)
    for (std::size_t r = 0; r < spec.size; ++r)
      for (std::size_t c = 0; c < spec.size; ++c)
        coords.push_back(images.pixels[i * plane + (top + r) * images.width + left + c]);
  return PointCloud(images.count, spec.size * spec.size, std::move(coords));
}

// Samples sample_n distinct images, scales and noises them, then crops.
inline PointCloud crop_to_cloud(const ImageSet& images, const CropSpec& spec, std::size_t sample_n, double noise_sd,
                                std::uint64_t seed) {
  if (spec.size < 1 || spec.size > images.height || spec.size > images.width)
    throw std::invalid_argument("crop of size " + std::to_string(spec.size) + " does not fit " +
                                std::to_string(images.height) + "x" + std::to_string(images.width) + " images");
  Rng rng(seed);
  const auto chosen = sample_without_replacement(images.count, sample_n, rng);
  return crop(add_noise(images, chosen, noise_sd, rng), spec);
}

// Permutes each point's coordinates with its own random permutation.
inline PointCloud shuffle_pixels(const PointCloud& cloud, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> c = cloud.coords();
  const std::size_t d = cloud.dim();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    double* row = c.data() + i * d;
    for (std::size_t k = d; k > 1; --k) std::swap(row[k - 1], row[rng.below(k)]);
  }
  return PointCloud(cloud.size(), d, std::move(c));
}

// Synthetic stand-in for a digit dataset: a bright spot orbits the image
// center at a random angle (so center crops trace a loop), the rest of the
// image is black.
inline ImageSet gen_structured_center_images(std::size_t count, std::uint64_t seed, std::size_t height = 28,
                                             std::size_t width = 28) {
  if (height < 10 || width < 10) throw std::invalid_argument("structured-center images need at least 10x10 pixels");
  Rng rng(seed);
  ImageSet s{count, height, width, std::vector<std::uint8_t>(count * height * width, 0)};
  const double cy = (static_cast<double>(height) - 1.0) / 2.0;
  const double cx = (static_cast<double>(width) - 1.0) / 2.0;
  constexpr double orbit = 2.5;   // pixels
  constexpr double spread = 1.5;  // spot standard deviation, pixels
  for (std::size_t k = 0; k < count; ++k) {
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double sy = cy + orbit * std::sin(theta);
    const double sx = cx + orbit * std::cos(theta);
    for (std::size_t r = 0; r < height; ++r)
      for (std::size_t c = 0; c < width; ++c) {
        const double d2 = (r - sy) * (r - sy) + (c - sx) * (c - sx);
        const double v = 255.0 * std::exp(-d2 / (2.0 * spread * spread));
        s.pixels[k * height * width + r * width + c] = static_cast<std::uint8_t>(std::lround(v));
      }
  }
  return s;
}

}  // namespace topokit

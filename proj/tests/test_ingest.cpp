#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include "topokit/ingest.hpp"

using namespace topokit;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<std::uint8_t> bytes_of(const ImageSet& s) {
  std::ostringstream os;
  write_idx(os, s);
  const std::string b = os.str();
  return {b.begin(), b.end()};
}

IdxError::Kind kind_of(const std::vector<std::uint8_t>& bytes) {
  try {
    parse_idx(bytes);
  } catch (const IdxError& e) {
    return e.kind();
  }
  FAIL("parse_idx accepted malformed bytes");
  return IdxError::Kind::BadMagic;
}

ImageSet ramp(std::size_t count, std::size_t h, std::size_t w) {
  ImageSet s{count, h, w, std::vector<std::uint8_t>(count * h * w)};
  for (std::size_t i = 0; i < s.pixels.size(); ++i) s.pixels[i] = static_cast<std::uint8_t>(i % 251);
  return s;
}

}  // namespace

TEST_CASE("IDX round trip of two 3x3 images") {
  const ImageSet s{2, 3, 3, {0, 1, 2, 3, 4, 5, 6, 7, 8, 255, 254, 253, 252, 251, 250, 249, 248, 247}};
  const auto bytes = bytes_of(s);
  REQUIRE(bytes.size() == 16 + 18);
  CHECK(bytes[2] == 0x08);
  CHECK(bytes[3] == 0x03);
  CHECK(bytes[7] == 2);
  const auto back = parse_idx(bytes);
  CHECK(back == s);
  CHECK(back.at(1, 0, 2) == 253);

  const auto path = (std::filesystem::temp_directory_path() / "topokit_roundtrip.idx").string();
  write_idx(path, s);
  CHECK(read_idx(path) == s);
  std::remove(path.c_str());
}

TEST_CASE("IDX errors are distinguished") {
  using K = IdxError::Kind;
  CHECK(kind_of({}) == K::TruncatedHeader);
  CHECK(kind_of({0, 0, 8}) == K::TruncatedHeader);
  CHECK(kind_of({0, 0, 8, 3, 0, 0}) == K::TruncatedHeader);
  CHECK(kind_of({0, 0, 9, 3}) == K::BadMagic);
  CHECK(kind_of({1, 0, 8, 3}) == K::BadMagic);
  CHECK(kind_of({0, 0, 8, 1}) == K::BadDimensionCount);

  auto five = bytes_of(ramp(5, 2, 2));
  five.resize(five.size() - 4);  // bytes for four images only
  CHECK(kind_of(five) == K::TruncatedPayload);

  CHECK_THROWS_AS(read_idx("/nonexistent/file.idx"), IoError);
}

TEST_CASE("center and corner crops") {
  const auto s = ramp(3, 28, 28);
  const auto center = crop_to_cloud(s, {CropRegion::Center, 10}, 3, 0.0, 1);
  CHECK(center.size() == 3);
  CHECK(center.dim() == 100);

  // Sampling all images permutes them; find each point's source by its first pixel.
  const auto corner = crop_to_cloud(s, {CropRegion::CornerTopLeft, 10}, 3, 0.0, 1);
  for (std::size_t i = 0; i < 3; ++i) {
    std::size_t src = 3;
    for (std::size_t k = 0; k < 3; ++k)
      if (std::abs(corner(i, 0) - s.at(k, 0, 0) / 255.0) < 1e-15) src = k;
    REQUIRE(src < 3);
    for (std::size_t r = 0; r < 10; ++r)
      for (std::size_t c = 0; c < 10; ++c) {
        CHECK(corner(i, r * 10 + c) == s.at(src, r, c) / 255.0);
        CHECK(center(i, r * 10 + c) == s.at(src, 9 + r, 9 + c) / 255.0);
      }
  }
}

TEST_CASE("odd margins round the center offset down") {
  const auto s = ramp(1, 13, 12);
  const auto c = crop_to_cloud(s, {CropRegion::Center, 10}, 1, 0.0, 0);
  CHECK(c(0, 0) == s.at(0, 1, 1) / 255.0);
}

TEST_CASE("zero images without noise give the zero vector") {
  const ImageSet s{4, 12, 12, std::vector<std::uint8_t>(4 * 144, 0)};
  const auto c = crop_to_cloud(s, {CropRegion::Center, 10}, 4, 0.0, 3);
  for (double x : c.coords()) CHECK(x == 0.0);
}

TEST_CASE("noise is added and is reproducible") {
  const auto s = ramp(20, 12, 12);
  const auto a = crop_to_cloud(s, {CropRegion::Center, 10}, 10, 0.1, 5);
  CHECK(a == crop_to_cloud(s, {CropRegion::Center, 10}, 10, 0.1, 5));
  CHECK_FALSE(a == crop_to_cloud(s, {CropRegion::Center, 10}, 10, 0.1, 6));
}

TEST_CASE("crop argument errors") {
  const auto s = ramp(5, 12, 12);
  CHECK_THROWS_AS(crop_to_cloud(s, {CropRegion::Center, 10}, 6, 0.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(crop_to_cloud(s, {CropRegion::Center, 13}, 2, 0.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(crop_to_cloud(s, {CropRegion::Center, 0}, 2, 0.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(crop_to_cloud(s, {CropRegion::Center, 10}, 2, -1.0, 0), std::invalid_argument);
}

TEST_CASE("sampling without replacement") {
  Rng rng(4);
  const auto idx = sample_without_replacement(100, 100, rng);
  CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == 100);
  const auto few = sample_without_replacement(1000, 10, rng);
  CHECK(std::set<std::size_t>(few.begin(), few.end()).size() == 10);
  CHECK_THROWS_AS(sample_without_replacement(3, 4, rng), std::invalid_argument);
}

TEST_CASE("shuffle_pixels") {
  const auto one = gen_gaussian_blob(30, 1, 1.0, 2);
  CHECK(shuffle_pixels(one, 9) == one);

  const auto c = gen_gaussian_blob(200, 100, 1.0, 3);
  const auto s = shuffle_pixels(c, 11);
  REQUIRE(s.size() == c.size());
  REQUIRE(s.dim() == c.dim());
  std::set<std::vector<std::size_t>> perms;
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::vector<double> a(c.point(i).begin(), c.point(i).end()), b(s.point(i).begin(), s.point(i).end());
    std::vector<std::size_t> perm;
    for (double x : b) perm.push_back(static_cast<std::size_t>(std::find(a.begin(), a.end(), x) - a.begin()));
    perms.insert(perm);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    REQUIRE(a == b);
  }
  CHECK(perms.size() > 1);
  CHECK(shuffle_pixels(c, 11) == s);
}

TEST_CASE("structured-center images") {
  const auto s = gen_structured_center_images(50, 1);
  CHECK(s.count == 50);
  CHECK(s.height == 28);
  CHECK(s.width == 28);
  CHECK(s == gen_structured_center_images(50, 1));
  // bright near the center, dark in the far corner
  for (std::size_t k = 0; k < s.count; ++k) {
    std::uint8_t peak = 0;
    for (std::size_t r = 9; r < 19; ++r)
      for (std::size_t c = 9; c < 19; ++c) peak = std::max(peak, s.at(k, r, c));
    CHECK(peak > 200);
    CHECK(s.at(k, 0, 0) == 0);
  }
  CHECK_THROWS_AS(gen_structured_center_images(5, 1, 8, 28), std::invalid_argument);
}

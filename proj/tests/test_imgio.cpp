// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "fsutil.hpp"
#include "imgio.hpp"
#include "rng.hpp"
#include "test_support.hpp"

using namespace lehopp;
using lehopp::test::TempDir;

namespace {

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

} // namespace

TEST_CASE("ppm: 1x1 red pixel decodes to exact unit values") {
  TempDir dir("ppm");
  write_bytes(dir / "red.ppm", std::string("P6\n1 1\n255\n") + '\xff' + '\x00' + '\x00');
  const Image img = read_ppm(dir / "red.ppm");
  CHECK(img.width == 1);
  CHECK(img.height == 1);
  CHECK(img.at(0, 0, 0) == 1.0f);
  CHECK(img.at(0, 0, 1) == 0.0f);
  CHECK(img.at(0, 0, 2) == 0.0f);
}

TEST_CASE("ppm: write(read(f)) is byte-identical") {
  TempDir dir("ppm");
  const Image img = lehopp::test::noise_image(13, 7, 42);
  write_ppm(img, dir / "a.ppm");
  write_ppm(read_ppm(dir / "a.ppm"), dir / "b.ppm");
  CHECK(read_file(dir / "a.ppm") == read_file(dir / "b.ppm"));
}

TEST_CASE("ppm: header comments are tolerated") {
  TempDir dir("ppm");
  write_bytes(dir / "c.ppm", std::string("P6\n# a comment\n1 1\n255\n") + '\x10' + '\x20' + '\x30');
  const Image img = read_ppm(dir / "c.ppm");
  CHECK(img.at(0, 0, 1) == doctest::Approx(0x20 / 255.0).epsilon(1e-6));
}

TEST_CASE("ppm: rejects wrong magic, maxval and truncation") {
  TempDir dir("ppm");
  write_bytes(dir / "p5.ppm", "P5\n1 1\n255\n\xff");
  CHECK_THROWS_AS(read_ppm(dir / "p5.ppm"), Error);

  write_bytes(dir / "max.ppm", std::string("P6\n1 1\n65535\n") + std::string(6, '\x00'));
  CHECK_THROWS_AS(read_ppm(dir / "max.ppm"), Error);

  write_bytes(dir / "short.ppm", std::string("P6\n2 2\n255\n") + std::string(5, '\x00'));
  try {
    read_ppm(dir / "short.ppm");
    FAIL("expected truncation error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::truncated_payload);
  }
}

TEST_CASE("pfm: bottom-up scanlines map to top-down row-major") {
  TempDir dir("pfm");
  // 2x2 "Pf", payload rows bottom-up: file row 0 = image bottom row.
  std::string bytes = "Pf\n2 2\n-1.0\n";
  const float payload[4] = {0.0f, 1.0f, 2.0f, 3.0f};
  bytes.append(reinterpret_cast<const char*>(payload), sizeof(payload));
  write_bytes(dir / "m.pfm", bytes);

  const ScalarMap map = read_pfm_map(dir / "m.pfm");
  CHECK(map.at(0, 0) == 2.0f); // top row comes from the second file row
  CHECK(map.at(1, 0) == 3.0f);
  CHECK(map.at(0, 1) == 0.0f);
  CHECK(map.at(1, 1) == 1.0f);
}

TEST_CASE("pfm: roundtrip is bit-exact, including denormals and negatives") {
  TempDir dir("pfm");
  ScalarMap map = ScalarMap::filled(5, 3, 0.0f);
  SplitMix64 rng(7);
  for (float& v : map.data) {
    v = static_cast<float>(rng.next_double() * 2.0 - 1.0) * 1e-3f;
  }
  map.data[0] = -0.0f;
  map.data[1] = 1e-41f; // denormal
  write_pfm(map, dir / "m.pfm");
  const ScalarMap back = read_pfm_map(dir / "m.pfm");
  REQUIRE(back.data.size() == map.data.size());
  for (size_t i = 0; i < map.data.size(); ++i) {
    CHECK(std::memcmp(&back.data[i], &map.data[i], sizeof(float)) == 0);
  }

  const NormImage rgb = lehopp::test::noise_norm_image(4, 6, 11, 2.5f);
  write_pfm(rgb, dir / "rgb.pfm");
  const PfmData data = read_pfm(dir / "rgb.pfm");
  REQUIRE(std::holds_alternative<NormImage>(data));
  CHECK(std::get<NormImage>(data).data == rgb.data);
}

TEST_CASE("pfm: rejects big-endian scale and NaN payloads") {
  TempDir dir("pfm");
  std::string big = "Pf\n1 1\n1.0\n";
  const float one = 1.0f;
  big.append(reinterpret_cast<const char*>(&one), sizeof(one));
  write_bytes(dir / "big.pfm", big);
  try {
    read_pfm_map(dir / "big.pfm");
    FAIL("expected big-endian rejection");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::big_endian);
  }

  std::string nan_bytes = "Pf\n1 1\n-1.0\n";
  const float nan_value = std::nanf("");
  nan_bytes.append(reinterpret_cast<const char*>(&nan_value), sizeof(nan_value));
  write_bytes(dir / "nan.pfm", nan_bytes);
  try {
    read_pfm_map(dir / "nan.pfm");
    FAIL("expected NaN rejection");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::nan_payload);
  }
}

TEST_CASE("pgm: 0/255 decode to prune/keep; anything else is ambiguous") {
  TempDir dir("pgm");
  write_bytes(dir / "keep.pgm", std::string("P5\n2 1\n255\n") + '\xff' + '\xff');
  CHECK(read_pgm(dir / "keep.pgm").kept_count() == 2);

  write_bytes(dir / "prune.pgm", std::string("P5\n2 1\n255\n") + '\x00' + '\x00');
  CHECK(read_pgm(dir / "prune.pgm").kept_count() == 0);

  write_bytes(dir / "gray.pgm", std::string("P5\n1 1\n255\n") + '\x80');
  try {
    read_pgm(dir / "gray.pgm");
    FAIL("expected ambiguous-mask rejection");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ambiguous_mask);
  }
}

TEST_CASE("pgm: roundtrip preserves bits") {
  TempDir dir("pgm");
  BitMask mask = BitMask::filled(9, 4, 1);
  SplitMix64 rng(3);
  for (uint8_t& b : mask.bits) {
    b = rng.next_below(2) ? 1 : 0;
  }
  write_pgm(mask, dir / "m.pgm");
  CHECK(read_pgm(dir / "m.pgm").bits == mask.bits);
}

TEST_CASE("preprocess: identity params, closed-form case, inverse") {
  Image img = Image::filled(2, 2, 0.0f);
  img.at(0, 0, 0) = 1.0f;
  img.at(1, 1, 2) = 0.25f;

  NormParams identity;
  identity.mean = {0.0f, 0.0f, 0.0f};
  identity.stddev = {1.0f, 1.0f, 1.0f};
  const NormImage same = preprocess(img, identity);
  CHECK(same.data == img.data);

  NormParams half;
  half.mean = {0.5f, 0.5f, 0.5f};
  half.stddev = {0.5f, 0.5f, 0.5f};
  CHECK(preprocess(img, half).at(0, 0, 0) == doctest::Approx(1.0).epsilon(1e-9));

  const Image img2 = lehopp::test::noise_image(6, 5, 9);
  NormParams conventional; // the defaults
  const Image back = depreprocess(preprocess(img2, conventional), conventional);
  for (size_t i = 0; i < img2.data.size(); ++i) {
    CHECK(back.data[i] == doctest::Approx(img2.data[i]).epsilon(1e-6));
  }
}

TEST_CASE("depreprocess clamps out-of-gamut values") {
  NormImage img = NormImage::filled(1, 1, 0.0f);
  NormParams p;
  p.mean = {0.0f, 0.0f, 0.0f};
  p.stddev = {1.0f, 1.0f, 1.0f};
  img.at(0, 0, 0) = -0.1f;
  img.at(0, 0, 1) = 1.2f;
  const Image out = depreprocess(img, p);
  CHECK(out.at(0, 0, 0) == 0.0f);
  CHECK(out.at(0, 0, 1) == 1.0f);
}

// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#include "imgio.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "fsutil.hpp"

static_assert(std::endian::native == std::endian::little,
              "float payload I/O assumes a little-endian host");

namespace lehopp {

Image Image::filled(int width, int height, float value) {
  Image img;
  img.width = width;
  img.height = height;
  img.data.assign(static_cast<size_t>(width) * static_cast<size_t>(height) * 3, value);
  return img;
}

NormImage NormImage::filled(int width, int height, float value) {
  NormImage img;
  img.width = width;
  img.height = height;
  img.data.assign(static_cast<size_t>(width) * static_cast<size_t>(height) * 3, value);
  return img;
}

ScalarMap ScalarMap::filled(int width, int height, float value) {
  ScalarMap map;
  map.width = width;
  map.height = height;
  map.data.assign(static_cast<size_t>(width) * static_cast<size_t>(height), value);
  return map;
}

BitMask BitMask::filled(int width, int height, uint8_t value) {
  BitMask mask;
  mask.width = width;
  mask.height = height;
  mask.bits.assign(static_cast<size_t>(width) * static_cast<size_t>(height), value);
  return mask;
}

size_t BitMask::kept_count() const {
  size_t n = 0;
  for (uint8_t b : bits) {
    n += b;
  }
  return n;
}

NormImage preprocess(const Image& image, const NormParams& params) {
  for (float s : params.stddev) {
    require(s > 0.0f, Errc::invalid_argument, "standardization std must be positive");
  }
  NormImage out;
  out.width = image.width;
  out.height = image.height;
  out.data.resize(image.data.size());
  for (size_t i = 0; i < image.data.size(); ++i) {
    const size_t c = i % 3;
    out.data[i] = (image.data[i] - params.mean[c]) / params.stddev[c];
  }
  return out;
}

Image depreprocess(const NormImage& image, const NormParams& params) {
  Image out;
  out.width = image.width;
  out.height = image.height;
  out.data.resize(image.data.size());
  for (size_t i = 0; i < image.data.size(); ++i) {
    const size_t c = i % 3;
    const float v = image.data[i] * params.stddev[c] + params.mean[c];
    out.data[i] = std::min(1.0f, std::max(0.0f, v));
  }
  return out;
}

namespace {

// Header scanner for the binary netpbm formats. Skips whitespace and
// '#' comments between tokens, as the formats allow.
class PnmHeader {
public:
  PnmHeader(const std::string& bytes, const std::string& name) : bytes_(bytes), name_(name) {}

  std::string token() {
    skip_separators();
    require(pos_ < bytes_.size(), Errc::malformed_header, "unexpected end of header in " + name_);
    size_t start = pos_;
    while (pos_ < bytes_.size() && !is_space(bytes_[pos_])) {
      ++pos_;
    }
    return bytes_.substr(start, pos_ - start);
  }

  int int_token() {
    const std::string t = token();
    int value = 0;
    for (char ch : t) {
      require(ch >= '0' && ch <= '9', Errc::malformed_header,
              "non-numeric header field '" + t + "' in " + name_);
      value = value * 10 + (ch - '0');
      require(value <= (1 << 24), Errc::malformed_header, "header field out of range in " + name_);
    }
    require(!t.empty(), Errc::malformed_header, "empty header field in " + name_);
    return value;
  }

  /// Consumes the single whitespace byte that separates header and payload.
  size_t payload_offset() {
    require(pos_ < bytes_.size() && is_space(bytes_[pos_]), Errc::malformed_header,
            "missing payload separator in " + name_);
    return pos_ + 1;
  }

private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

  void skip_separators() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
          ++pos_;
        }
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::string name_;
  size_t pos_ = 0;
};

} // namespace

Image read_ppm(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  PnmHeader header(bytes, path.string());
  const std::string magic = header.token();
  require(magic == "P6", Errc::unsupported_format,
          "expected P6 PPM, got '" + magic + "' in " + path.string());
  const int width = header.int_token();
  const int height = header.int_token();
  const int maxval = header.int_token();
  require(width > 0 && height > 0, Errc::malformed_header, "bad dimensions in " + path.string());
  require(maxval == 255, Errc::unsupported_format,
          "unsupported maxval " + std::to_string(maxval) + " in " + path.string());
  const size_t offset = header.payload_offset();
  const size_t need = static_cast<size_t>(width) * static_cast<size_t>(height) * 3;
  require(bytes.size() - offset >= need, Errc::truncated_payload,
          "truncated pixel payload in " + path.string());

  Image img;
  img.width = width;
  img.height = height;
  img.data.resize(need);
  for (size_t i = 0; i < need; ++i) {
    img.data[i] = static_cast<float>(static_cast<unsigned char>(bytes[offset + i])) / 255.0f;
  }
  return img;
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                    "\n255\n";
  out.reserve(out.size() + image.data.size());
  for (float v : image.data) {
    const float clamped = std::min(1.0f, std::max(0.0f, v));
    out.push_back(static_cast<char>(std::lround(clamped * 255.0f)));
  }
  atomic_write(path, out);
}

namespace {

PfmData read_pfm_impl(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  PnmHeader header(bytes, path.string());
  const std::string magic = header.token();
  require(magic == "Pf" || magic == "PF", Errc::unsupported_format,
          "expected Pf/PF PFM, got '" + magic + "' in " + path.string());
  const int channels = magic == "Pf" ? 1 : 3;
  const int width = header.int_token();
  const int height = header.int_token();
  const std::string scale_token = header.token();
  const double scale = std::strtod(scale_token.c_str(), nullptr);
  require(scale < 0.0, Errc::big_endian,
          "big-endian PFM (positive scale) not supported: " + path.string());
  const size_t offset = header.payload_offset();
  const size_t count = static_cast<size_t>(width) * static_cast<size_t>(height) *
                       static_cast<size_t>(channels);
  require(bytes.size() - offset >= count * 4, Errc::truncated_payload,
          "truncated float payload in " + path.string());

  // PFM scanlines run bottom-up; flip into top-down row-major order.
  std::vector<float> values(count);
  const size_t row_floats = static_cast<size_t>(width) * static_cast<size_t>(channels);
  for (int y = 0; y < height; ++y) {
    const size_t src = offset + static_cast<size_t>(height - 1 - y) * row_floats * 4;
    std::memcpy(values.data() + static_cast<size_t>(y) * row_floats, bytes.data() + src,
                row_floats * 4);
  }
  for (float v : values) {
    require(!std::isnan(v), Errc::nan_payload, "NaN in float payload: " + path.string());
  }

  if (channels == 1) {
    ScalarMap map;
    map.width = width;
    map.height = height;
    map.data = std::move(values);
    return map;
  }
  NormImage img;
  img.width = width;
  img.height = height;
  img.data = std::move(values);
  return img;
}

std::string pfm_bytes(const float* values, int width, int height, int channels) {
  std::string out = std::string(channels == 1 ? "Pf" : "PF") + "\n" + std::to_string(width) + " " +
                    std::to_string(height) + "\n-1.0\n";
  const size_t row_floats = static_cast<size_t>(width) * static_cast<size_t>(channels);
  const size_t payload_start = out.size();
  out.resize(out.size() + row_floats * static_cast<size_t>(height) * 4);
  for (int y = 0; y < height; ++y) {
    const float* src = values + static_cast<size_t>(height - 1 - y) * row_floats;
    std::memcpy(out.data() + payload_start + static_cast<size_t>(y) * row_floats * 4, src,
                row_floats * 4);
  }
  return out;
}

} // namespace

PfmData read_pfm(const std::filesystem::path& path) { return read_pfm_impl(path); }

ScalarMap read_pfm_map(const std::filesystem::path& path) {
  PfmData data = read_pfm_impl(path);
  require(std::holds_alternative<ScalarMap>(data), Errc::unsupported_format,
          "expected single-channel PFM: " + path.string());
  return std::get<ScalarMap>(std::move(data));
}

void write_pfm(const ScalarMap& map, const std::filesystem::path& path) {
  atomic_write(path, pfm_bytes(map.data.data(), map.width, map.height, 1));
}

void write_pfm(const NormImage& image, const std::filesystem::path& path) {
  atomic_write(path, pfm_bytes(image.data.data(), image.width, image.height, 3));
}

BitMask read_pgm(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  PnmHeader header(bytes, path.string());
  const std::string magic = header.token();
  require(magic == "P5", Errc::unsupported_format,
          "expected P5 PGM, got '" + magic + "' in " + path.string());
  const int width = header.int_token();
  const int height = header.int_token();
  const int maxval = header.int_token();
  require(maxval == 255, Errc::unsupported_format,
          "unsupported maxval " + std::to_string(maxval) + " in " + path.string());
  const size_t offset = header.payload_offset();
  const size_t need = static_cast<size_t>(width) * static_cast<size_t>(height);
  require(bytes.size() - offset >= need, Errc::truncated_payload,
          "truncated mask payload in " + path.string());

  BitMask mask;
  mask.width = width;
  mask.height = height;
  mask.bits.resize(need);
  for (size_t i = 0; i < need; ++i) {
    const unsigned char b = static_cast<unsigned char>(bytes[offset + i]);
    require(b == 0 || b == 255, Errc::ambiguous_mask,
            "ambiguous mask byte " + std::to_string(b) + " in " + path.string());
    mask.bits[i] = b == 255 ? 1 : 0;
  }
  return mask;
}

void write_pgm(const BitMask& mask, const std::filesystem::path& path) {
  std::string out = "P5\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) +
                    "\n255\n";
  out.reserve(out.size() + mask.bits.size());
  for (uint8_t b : mask.bits) {
    out.push_back(static_cast<char>(b ? 255 : 0));
  }
  atomic_write(path, out);
}

} // namespace lehopp

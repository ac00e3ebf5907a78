// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lehopp {

/// Error categories surfaced across the C API boundary.
enum class Errc {
  io,                  // missing file, short read, failed write
  unsupported_format,  // wrong magic, wrong maxval, wrong channel count
  malformed_header,    // header present but unparseable
  truncated_payload,   // payload shorter than the header promises
  ambiguous_mask,      // mask byte outside {0,255}
  big_endian,          // PFM with positive scale field
  nan_payload,         // non-finite values in a float payload
  shape_mismatch,      // operands disagree on raster dimensions
  invalid_argument,    // contract violation on scalar inputs
  empty_selection,     // no candidates / empty mask where one is required
  non_convergence,     // iterative solver hit its iteration cap
  undefined_statistic, // e.g. rank correlation of a constant sequence
};

class Error : public std::runtime_error {
public:
  Error(Errc code, std::string message) : std::runtime_error(std::move(message)), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, Errc code, const std::string& message) {
  if (!condition) {
    fail(code, message);
  }
}

} // namespace lehopp

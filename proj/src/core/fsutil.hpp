// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

namespace lehopp {

/// Writes `bytes` to `path` atomically: the payload lands in a sibling
/// temporary file first and is renamed into place, so readers never observe
/// a partially written file.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);

std::string read_file(const std::filesystem::path& path);

void ensure_directory(const std::filesystem::path& dir);

/// Deterministic textual form of a double (shortest round-trip, via
/// std::to_chars); locale independent.
std::string format_double(double value);

/// Fixed-precision textual form, e.g. format_double_fixed(1.5, 3) == "1.500".
std::string format_double_fixed(double value, int precision);

} // namespace lehopp

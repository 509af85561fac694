// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pvzsl/ndcore/matrix.hpp"

namespace pvzsl::gzs1 {

// "GZS1" tensor files:
//   bytes 0..3   magic "GZS1"
//   u32 LE       rank
//   u32 LE × rank dims
//   payload      prod(dims) little-endian 4-byte elements, row-major
// The element type (binary32 float or u32) is implied by the file's role; it is not stored.

inline constexpr char kMagic[4] = {'G', 'Z', 'S', '1'};

struct Header {
  std::vector<std::uint32_t> dims;

  std::uint64_t element_count() const noexcept;
};

/// Raw little-endian encodings, exposed for tests and tools.
std::string encode_f32(const Matrix& m);
std::string encode_u32(std::span<const std::uint32_t> values);

/// Writes a rank-2 f32 tensor. Entries are rounded to binary32.
void write_f32(const std::filesystem::path& path, const Matrix& m);
/// Writes a rank-1 u32 tensor.
void write_u32(const std::filesystem::path& path, std::span<const std::uint32_t> values);

/// Reads a rank-2 f32 tensor. A rank-1 file of length n reads as n×1. Throws FormatError
/// naming the file on a bad magic, a truncated header or payload, or trailing bytes.
Matrix read_f32(const std::filesystem::path& path);
/// Reads a rank-1 u32 tensor (same error contract).
std::vector<std::uint32_t> read_u32(const std::filesystem::path& path);

/// Parses only the header of a file.
Header read_header(const std::filesystem::path& path);

}  // namespace pvzsl::gzs1

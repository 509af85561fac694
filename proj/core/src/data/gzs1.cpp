// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pvzsl/data/gzs1.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "pvzsl/ndcore/errors.hpp"

namespace pvzsl::gzs1 {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  }
  return v;
}

std::string header_bytes(std::span<const std::uint32_t> dims) {
  std::string out(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(dims.size()));
  for (std::uint32_t d : dims) put_u32(out, d);
  return out;
}

std::uint32_t checked_dim(std::size_t n, const char* what) {
  if (n > 0xffffffffu) throw FormatError(std::string(what) + " exceeds the u32 range");
  return static_cast<std::uint32_t>(n);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(path.string() + ": write failed");
}

struct Parsed {
  Header header;
  std::size_t payload_offset = 0;
};

Parsed parse(const std::string& bytes, const std::filesystem::path& path) {
  const std::string name = path.string();
  if (bytes.size() < 8) throw FormatError(name + ": truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError(name + ": bad magic (expected GZS1)");
  const std::uint32_t rank = get_u32(bytes, 4);
  if (rank == 0 || rank > 8) throw FormatError(name + ": unsupported rank " + std::to_string(rank));
  const std::size_t header_size = 8 + 4 * static_cast<std::size_t>(rank);
  if (bytes.size() < header_size) throw FormatError(name + ": truncated header");
  Parsed p;
  for (std::uint32_t i = 0; i < rank; ++i) p.header.dims.push_back(get_u32(bytes, 8 + 4 * i));
  p.payload_offset = header_size;
  const std::uint64_t expected = p.header.element_count() * 4;
  const std::uint64_t actual = bytes.size() - header_size;
  if (actual < expected) {
    throw FormatError(name + ": truncated payload (" + std::to_string(actual) + " of " +
                      std::to_string(expected) + " bytes)");
  }
  if (actual > expected) {
    throw FormatError(name + ": " + std::to_string(actual - expected) + " trailing bytes");
  }
  return p;
}

}  // namespace

std::uint64_t Header::element_count() const noexcept {
  std::uint64_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return n;
}

std::string encode_f32(const Matrix& m) {
  const std::uint32_t dims[2] = {checked_dim(m.rows(), "row count"),
                                 checked_dim(m.cols(), "column count")};
  std::string out = header_bytes(dims);
  out.reserve(out.size() + 4 * m.size());
  for (double v : m.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

std::string encode_u32(std::span<const std::uint32_t> values) {
  const std::uint32_t dims[1] = {checked_dim(values.size(), "length")};
  std::string out = header_bytes(dims);
  out.reserve(out.size() + 4 * values.size());
  for (std::uint32_t v : values) put_u32(out, v);
  return out;
}

void write_f32(const std::filesystem::path& path, const Matrix& m) { dump(path, encode_f32(m)); }

void write_u32(const std::filesystem::path& path, std::span<const std::uint32_t> values) {
  dump(path, encode_u32(values));
}

Matrix read_f32(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  const Parsed p = parse(bytes, path);
  std::size_t rows = 0, cols = 0;
  if (p.header.dims.size() == 1) {
    rows = p.header.dims[0];
    cols = 1;
  } else if (p.header.dims.size() == 2) {
    rows = p.header.dims[0];
    cols = p.header.dims[1];
  } else {
    throw FormatError(path.string() + ": expected a rank-2 tensor, got rank " +
                      std::to_string(p.header.dims.size()));
  }
  std::vector<double> values(rows * cols);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float f = std::bit_cast<float>(get_u32(bytes, p.payload_offset + 4 * i));
    values[i] = static_cast<double>(f);
  }
  return Matrix(rows, cols, std::move(values));
}

std::vector<std::uint32_t> read_u32(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  const Parsed p = parse(bytes, path);
  if (p.header.dims.size() != 1) {
    throw FormatError(path.string() + ": expected a rank-1 tensor, got rank " +
                      std::to_string(p.header.dims.size()));
  }
  std::vector<std::uint32_t> out(p.header.dims[0]);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = get_u32(bytes, p.payload_offset + 4 * i);
  return out;
}

Header read_header(const std::filesystem::path& path) { return parse(slurp(path), path).header; }

}  // namespace pvzsl::gzs1

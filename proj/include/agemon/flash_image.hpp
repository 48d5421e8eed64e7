#pragma once

// Deterministic known flash content: a pseudo-random pattern region read by
// the flash payload, the matrix operands, and the reference values the
// payloads verify against.
//
// Layout (byte offsets, little-endian):
//   [0, P)          pattern region, P = pattern_bytes
//   [P, P+64)       matrix A, int8 row-major
//   [P+64, P+128)   matrix B, int8 row-major
//   [P+128, P+144)  MD5 of the pattern region
//   [P+144, P+160)  MD5 of the RAM read/write pattern over the test region
//   [P+160, P+176)  det(A) * det(B), int128
//   [P+176, size)   filler

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "agemon/errors.hpp"
#include "agemon/matrix.hpp"
#include "agemon/md5.hpp"
#include "agemon/rng.hpp"

namespace agemon {

/// RAM read/write test pattern byte.
inline std::uint8_t ram_pattern_byte(std::size_t i) {
  return static_cast<std::uint8_t>((i * 151 + 17) % 256);
}

inline Md5Digest ram_pattern_digest(std::size_t bytes) {
  Md5 h;
  for (std::size_t i = 0; i < bytes; ++i) h.update(ram_pattern_byte(i));
  return h.finish();
}

struct FlashLayout {
  std::size_t pattern_bytes = 2048;

  std::size_t matrix_a() const { return pattern_bytes; }
  std::size_t matrix_b() const { return pattern_bytes + 64; }
  std::size_t pattern_digest() const { return pattern_bytes + 128; }
  std::size_t ram_digest() const { return pattern_bytes + 144; }
  std::size_t determinant() const { return pattern_bytes + 160; }
  std::size_t end() const { return pattern_bytes + 176; }
};

inline Md5Digest read_digest(std::span<const std::uint8_t> flash, std::size_t offset) {
  Md5Digest d{};
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = flash[offset + i];
  return d;
}

inline Matrix8 read_matrix(std::span<const std::uint8_t> flash, std::size_t offset) {
  Matrix8 m{};
  for (std::size_t i = 0; i < kMatrixDim; ++i) {
    for (std::size_t j = 0; j < kMatrixDim; ++j) {
      m[i][j] = static_cast<std::int8_t>(flash[offset + i * kMatrixDim + j]);
    }
  }
  return m;
}

inline Int128 read_int128(std::span<const std::uint8_t> flash, std::size_t offset) {
  unsigned __int128 v = 0;
  for (int i = 15; i >= 0; --i) v = (v << 8) | flash[offset + i];
  return static_cast<Int128>(v);
}

inline std::vector<std::uint8_t> build_flash_image(std::uint64_t seed, std::size_t flash_bytes,
                                                   const FlashLayout& layout,
                                                   std::size_t ram_test_bytes) {
  if (layout.pattern_bytes == 0) throw ConfigError("flash pattern region must be non-empty");
  if (flash_bytes < layout.end()) throw ConfigError("flash too small for the known image");
  std::vector<std::uint8_t> image(flash_bytes);
  Rng rng(derive_seed(seed, 0x666C617368ull));
  for (auto& b : image) b = static_cast<std::uint8_t>(rng.next() >> 56);

  for (std::size_t i = 0; i < kMatrixDim; ++i) {
    for (std::size_t j = 0; j < kMatrixDim; ++j) {
      image[layout.matrix_a() + i * kMatrixDim + j] = static_cast<std::uint8_t>(kMatrixA[i][j]);
      image[layout.matrix_b() + i * kMatrixDim + j] = static_cast<std::uint8_t>(kMatrixB[i][j]);
    }
  }
  const Md5Digest pattern = md5(std::span(image).first(layout.pattern_bytes));
  const Md5Digest ram = ram_pattern_digest(ram_test_bytes);
  for (std::size_t i = 0; i < 16; ++i) {
    image[layout.pattern_digest() + i] = pattern[i];
    image[layout.ram_digest() + i] = ram[i];
  }
  auto det = static_cast<unsigned __int128>(determinant(kMatrixA) * determinant(kMatrixB));
  for (std::size_t i = 0; i < 16; ++i) {
    image[layout.determinant() + i] = static_cast<std::uint8_t>(det);
    det >>= 8;
  }
  return image;
}

}  // namespace agemon

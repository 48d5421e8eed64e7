#pragma once

// Exact integer matrix product and determinant for the matrix payload.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace agemon {

inline constexpr std::size_t kMatrixDim = 8;

using Matrix8 = std::array<std::array<std::int64_t, kMatrixDim>, kMatrixDim>;
using Int128 = __int128;

/// Campaign operand matrices, entries in [-8, 8]. Stored in the flash image.
inline constexpr Matrix8 kMatrixA = {{
    {6, 5, -7, 1, 0, 0, -6, 5},
    {-8, 7, -8, 5, -4, 8, -7, -7},
    {-4, 4, -4, 2, -8, -2, 7, -3},
    {1, -5, 5, -6, 0, 6, -5, 0},
    {6, -2, 5, -2, -7, -8, -5, -3},
    {-1, -5, -8, -4, -3, -7, 3, 7},
    {-4, -8, 2, 6, -1, -3, -6, 3},
    {4, -2, 3, 0, -8, -1, -7, -6},
}};

inline constexpr Matrix8 kMatrixB = {{
    {7, 5, 6, -1, 3, -2, 4, -8},
    {-7, -6, -7, 6, 0, 1, -6, 2},
    {6, -8, 8, 7, 7, 3, -6, -8},
    {8, 5, 2, 1, -8, 1, -2, 0},
    {-3, 5, -8, -7, -6, -3, 2, -8},
    {4, 1, -6, -8, -4, -2, 4, -2},
    {0, -4, 7, 5, -1, 7, -8, 8},
    {-1, 5, -1, -2, -4, 8, 8, -8},
}};

inline Matrix8 identity_matrix() {
  Matrix8 m{};
  for (std::size_t i = 0; i < kMatrixDim; ++i) m[i][i] = 1;
  return m;
}

inline Matrix8 multiply(const Matrix8& a, const Matrix8& b) {
  Matrix8 out{};
  for (std::size_t i = 0; i < kMatrixDim; ++i) {
    for (std::size_t j = 0; j < kMatrixDim; ++j) {
      std::int64_t acc = 0;
      for (std::size_t k = 0; k < kMatrixDim; ++k) acc += a[i][k] * b[k][j];
      out[i][j] = acc;
    }
  }
  return out;
}

/// Fraction-free (Bareiss) elimination. Every division is exact; 128-bit
/// intermediates hold products of two leading minors.
inline Int128 determinant(const Matrix8& input) {
  std::array<std::array<Int128, kMatrixDim>, kMatrixDim> m{};
  for (std::size_t i = 0; i < kMatrixDim; ++i) {
    for (std::size_t j = 0; j < kMatrixDim; ++j) m[i][j] = input[i][j];
  }
  Int128 sign = 1;
  Int128 previous = 1;
  for (std::size_t k = 0; k + 1 < kMatrixDim; ++k) {
    if (m[k][k] == 0) {
      std::size_t swap_row = k + 1;
      while (swap_row < kMatrixDim && m[swap_row][k] == 0) ++swap_row;
      if (swap_row == kMatrixDim) return 0;
      std::swap(m[k], m[swap_row]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < kMatrixDim; ++i) {
      for (std::size_t j = k + 1; j < kMatrixDim; ++j) {
        Int128 lhs, rhs, diff;
        if (__builtin_mul_overflow(m[i][j], m[k][k], &lhs) ||
            __builtin_mul_overflow(m[i][k], m[k][j], &rhs) ||
            __builtin_sub_overflow(lhs, rhs, &diff)) {
          throw std::overflow_error("determinant: 128-bit intermediate overflow");
        }
        m[i][j] = diff / previous;
      }
    }
    previous = m[k][k];
  }
  return sign * m[kMatrixDim - 1][kMatrixDim - 1];
}

}  // namespace agemon

#pragma once

// MD5 message digest (RFC 1321), streaming interface.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace agemon {

using Md5Digest = std::array<std::uint8_t, 16>;

class Md5 {
 public:
  Md5() { reset(); }

  void reset() {
    state_ = {0x67452301u, 0xefcdab89u, 0x98badcfeu, 0x10325476u};
    length_ = 0;
    buffered_ = 0;
  }

  void update(std::span<const std::uint8_t> data) {
    while (!data.empty() && buffered_ != 0) {
      update(data.front());
      data = data.subspan(1);
    }
    for (; data.size() >= 64; data = data.subspan(64)) {
      transform(data.data());
      length_ += 64;
    }
    for (std::uint8_t byte : data) update(byte);
  }

  void update(std::string_view text) {
    update(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }

  void update(std::uint8_t byte) {
    buffer_[buffered_++] = byte;
    ++length_;
    if (buffered_ == 64) {
      transform(buffer_.data());
      buffered_ = 0;
    }
  }

  Md5Digest finish() {
    const std::uint64_t bit_length = length_ * 8;
    update(std::uint8_t{0x80});
    while (buffered_ != 56) update(std::uint8_t{0});
    for (int i = 0; i < 8; ++i) {
      buffer_[buffered_++] = static_cast<std::uint8_t>(bit_length >> (8 * i));
    }
    transform(buffer_.data());
    buffered_ = 0;
    Md5Digest out{};
    for (int i = 0; i < 4; ++i) {
      for (int k = 0; k < 4; ++k) out[4 * i + k] = static_cast<std::uint8_t>(state_[i] >> (8 * k));
    }
    return out;
  }

 private:
  void transform(const std::uint8_t* block) {
    static constexpr std::uint32_t kSine[64] = {
        0xd76aa478, 0xe8c7b756, 0x242070db, 0xc1bdceee, 0xf57c0faf, 0x4787c62a, 0xa8304613,
        0xfd469501, 0x698098d8, 0x8b44f7af, 0xffff5bb1, 0x895cd7be, 0x6b901122, 0xfd987193,
        0xa679438e, 0x49b40821, 0xf61e2562, 0xc040b340, 0x265e5a51, 0xe9b6c7aa, 0xd62f105d,
        0x02441453, 0xd8a1e681, 0xe7d3fbc8, 0x21e1cde6, 0xc33707d6, 0xf4d50d87, 0x455a14ed,
        0xa9e3e905, 0xfcefa3f8, 0x676f02d9, 0x8d2a4c8a, 0xfffa3942, 0x8771f681, 0x6d9d6122,
        0xfde5380c, 0xa4beea44, 0x4bdecfa9, 0xf6bb4b60, 0xbebfbc70, 0x289b7ec6, 0xeaa127fa,
        0xd4ef3085, 0x04881d05, 0xd9d4d039, 0xe6db99e5, 0x1fa27cf8, 0xc4ac5665, 0xf4292244,
        0x432aff97, 0xab9423a7, 0xfc93a039, 0x655b59c3, 0x8f0ccc92, 0xffeff47d, 0x85845dd1,
        0x6fa87e4f, 0xfe2ce6e0, 0xa3014314, 0x4e0811a1, 0xf7537e82, 0xbd3af235, 0x2ad7d2bb,
        0xeb86d391};
    static constexpr unsigned kShift[64] = {7,  12, 17, 22, 7,  12, 17, 22, 7,  12, 17, 22, 7,
                                            12, 17, 22, 5,  9,  14, 20, 5,  9,  14, 20, 5,  9,
                                            14, 20, 5,  9,  14, 20, 4,  11, 16, 23, 4,  11, 16,
                                            23, 4,  11, 16, 23, 4,  11, 16, 23, 6,  10, 15, 21,
                                            6,  10, 15, 21, 6,  10, 15, 21, 6,  10, 15, 21};
    std::uint32_t m[16];
    for (int i = 0; i < 16; ++i) {
      m[i] = std::uint32_t{block[4 * i]} | std::uint32_t{block[4 * i + 1]} << 8 |
             std::uint32_t{block[4 * i + 2]} << 16 | std::uint32_t{block[4 * i + 3]} << 24;
    }
    std::uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
    // Fully unrolled so every shift amount and message index is a constant.
    [&]<std::size_t... I>(std::index_sequence<I...>) {
      auto step = [&]<std::size_t i>(std::integral_constant<std::size_t, i>) {
        std::uint32_t f;
        std::size_t g;
        if constexpr (i < 16) {
          f = (b & c) | (~b & d);
          g = i;
        } else if constexpr (i < 32) {
          f = (d & b) | (~d & c);
          g = (5 * i + 1) % 16;
        } else if constexpr (i < 48) {
          f = b ^ c ^ d;
          g = (3 * i + 5) % 16;
        } else {
          f = c ^ (b | ~d);
          g = (7 * i) % 16;
        }
        const std::uint32_t next = b + std::rotl(a + f + kSine[i] + m[g], int(kShift[i]));
        a = d;
        d = c;
        c = b;
        b = next;
      };
      (step(std::integral_constant<std::size_t, I>{}), ...);
    }(std::make_index_sequence<64>{});
    state_[0] += a;
    state_[1] += b;
    state_[2] += c;
    state_[3] += d;
  }

  std::array<std::uint32_t, 4> state_{};
  std::array<std::uint8_t, 64> buffer_{};
  std::uint64_t length_ = 0;
  std::size_t buffered_ = 0;
};

inline Md5Digest md5(std::span<const std::uint8_t> data) {
  Md5 h;
  h.update(data);
  return h.finish();
}

inline Md5Digest md5(std::string_view text) {
  Md5 h;
  h.update(text);
  return h.finish();
}

inline std::string to_hex(const Md5Digest& digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (auto b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  }
  return out;
}

}  // namespace agemon

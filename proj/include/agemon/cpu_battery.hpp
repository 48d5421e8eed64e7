#pragma once

// Modeled ALU with NZCV flags and a fixed self-test battery. A stand-in for
// a class-B CPU test: arithmetic flag boundaries, logic, shifts and a
// register-file move round trip, each against a precomputed expectation.

#include <array>
#include <cstdint>
#include <optional>
#include <string>

namespace agemon::cpu {

enum Flag : std::uint8_t { kV = 1, kC = 2, kZ = 4, kN = 8 };

struct AluResult {
  std::uint32_t value = 0;
  std::uint8_t flags = 0;

  friend bool operator==(const AluResult&, const AluResult&) = default;
};

enum class Op { Add, Adc, Sub, And, Orr, Eor, Bic, Mvn, Lsl, Lsr, Asr, Ror };

inline std::uint8_t nz(std::uint32_t v) {
  return static_cast<std::uint8_t>(((v >> 31) ? kN : 0) | (v == 0 ? kZ : 0));
}

inline AluResult add_with_carry(std::uint32_t a, std::uint32_t b, bool carry_in) {
  const std::uint64_t wide = std::uint64_t{a} + b + (carry_in ? 1 : 0);
  const auto r = static_cast<std::uint32_t>(wide);
  std::uint8_t f = nz(r);
  if (wide >> 32) f |= kC;
  if (((a ^ r) & (b ^ r)) >> 31) f |= kV;
  return {r, f};
}

/// Shift amounts are taken in [1, 31].
inline AluResult execute(Op op, std::uint32_t a, std::uint32_t b, bool carry_in = false) {
  switch (op) {
    case Op::Add: return add_with_carry(a, b, false);
    case Op::Adc: return add_with_carry(a, b, carry_in);
    case Op::Sub: return add_with_carry(a, ~b, true);
    case Op::And: return {a & b, nz(a & b)};
    case Op::Orr: return {a | b, nz(a | b)};
    case Op::Eor: return {a ^ b, nz(a ^ b)};
    case Op::Bic: return {a & ~b, nz(a & ~b)};
    case Op::Mvn: return {~a, nz(~a)};
    case Op::Lsl: {
      const std::uint32_t r = a << b;
      return {r, static_cast<std::uint8_t>(nz(r) | (((a >> (32 - b)) & 1) ? kC : 0))};
    }
    case Op::Lsr: {
      const std::uint32_t r = a >> b;
      return {r, static_cast<std::uint8_t>(nz(r) | (((a >> (b - 1)) & 1) ? kC : 0))};
    }
    case Op::Asr: {
      const auto r = static_cast<std::uint32_t>(static_cast<std::int32_t>(a) >> b);
      return {r, static_cast<std::uint8_t>(nz(r) | (((a >> (b - 1)) & 1) ? kC : 0))};
    }
    case Op::Ror: {
      const std::uint32_t r = (a >> b) | (a << (32 - b));
      return {r, static_cast<std::uint8_t>(nz(r) | ((r >> 31) ? kC : 0))};
    }
  }
  return {};
}

struct BatteryCase {
  Op op;
  std::uint32_t a;
  std::uint32_t b;
  bool carry_in;
  AluResult expected;
};

inline constexpr std::array<BatteryCase, 16> kBattery = {{
    {Op::Add, 0x7FFFFFFFu, 1u, false, {0x80000000u, kN | kV}},
    {Op::Add, 0xFFFFFFFFu, 1u, false, {0x00000000u, kZ | kC}},
    {Op::Add, 0x80000000u, 0x80000000u, false, {0x00000000u, kZ | kC | kV}},
    {Op::Adc, 0x12345678u, 0x0FEDCBA9u, true, {0x22222222u, 0}},
    {Op::Sub, 0u, 1u, false, {0xFFFFFFFFu, kN}},
    {Op::Sub, 0x80000000u, 1u, false, {0x7FFFFFFFu, kC | kV}},
    {Op::Sub, 5u, 5u, false, {0u, kZ | kC}},
    {Op::And, 0xF0F0F0F0u, 0x0FF00FF0u, false, {0x00F000F0u, 0}},
    {Op::Orr, 0xF0F0F0F0u, 0x0F0F0F0Fu, false, {0xFFFFFFFFu, kN}},
    {Op::Eor, 0xAAAAAAAAu, 0xAAAAAAAAu, false, {0u, kZ}},
    {Op::Bic, 0xFFFFFFFFu, 0x0000FFFFu, false, {0xFFFF0000u, kN}},
    {Op::Mvn, 0u, 0u, false, {0xFFFFFFFFu, kN}},
    {Op::Lsl, 0x80000001u, 1u, false, {0x00000002u, kC}},
    {Op::Lsr, 0x80000001u, 1u, false, {0x40000000u, kC}},
    {Op::Asr, 0x80000000u, 4u, false, {0xF8000000u, kN}},
    {Op::Ror, 0x00000001u, 1u, false, {0x80000000u, kN | kC}},
}};

inline constexpr std::array<std::uint32_t, 4> kRegisterPatterns = {
    0xA5A5A5A5u, 0x5A5A5A5Au, 0x00000001u, 0x80000000u};

/// Number of checked artifacts: battery cases plus register round trips.
inline constexpr std::size_t kCheckCount = kBattery.size() + kRegisterPatterns.size();

/// Runs the battery. `corrupt_check`, when set, flips one bit of that
/// check's observed value before comparison (timing-induced corruption).
/// Returns the index of the first failing check, or nullopt on pass.
inline std::optional<std::size_t> run_battery(std::optional<std::size_t> corrupt_check = {}) {
  std::size_t index = 0;
  for (const auto& c : kBattery) {
    AluResult r = execute(c.op, c.a, c.b, c.carry_in);
    if (corrupt_check == index) r.flags ^= kC;
    if (!(r == c.expected)) return index;
    ++index;
  }
  for (std::uint32_t pattern : kRegisterPatterns) {
    std::array<std::uint32_t, 16> regs{};
    regs[0] = pattern;
    for (std::size_t i = 1; i < regs.size(); ++i) regs[i] = regs[i - 1];
    std::uint32_t back = regs[15];
    if (corrupt_check == index) back ^= 1u;
    if (back != pattern) return index;
    ++index;
  }
  return std::nullopt;
}

}  // namespace agemon::cpu

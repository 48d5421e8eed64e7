#pragma once

// The five self-test payload probes: functional bodies that verify their own
// results, subsystem activation profiles, an execution-time model and the
// timing-error semantics around the device's maximum error-free frequency.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agemon/cpu_battery.hpp"
#include "agemon/device.hpp"
#include "agemon/errors.hpp"
#include "agemon/flash_image.hpp"
#include "agemon/matrix.hpp"
#include "agemon/md5.hpp"
#include "agemon/memory.hpp"
#include "agemon/rng.hpp"

namespace agemon {

enum class PayloadName { Matrix, FlashRead, RamRw, RamMarchC, CpuTest };

inline constexpr std::array<PayloadName, 5> kAllPayloads = {
    PayloadName::Matrix, PayloadName::FlashRead, PayloadName::RamRw, PayloadName::RamMarchC,
    PayloadName::CpuTest};

inline const char* to_string(PayloadName p) {
  switch (p) {
    case PayloadName::Matrix: return "matrix";
    case PayloadName::FlashRead: return "flash_read";
    case PayloadName::RamRw: return "ram_rw";
    case PayloadName::RamMarchC: return "ram_march_c";
    case PayloadName::CpuTest: return "cpu_test";
  }
  return "?";
}

inline std::optional<PayloadName> parse_payload(std::string_view text) {
  for (auto p : kAllPayloads) {
    if (text == to_string(p)) return p;
  }
  return std::nullopt;
}

enum class ExecutesFrom { Flash, Sram };

struct Payload {
  PayloadName name = PayloadName::CpuTest;
  SubsystemSet activated_subsystems;
  ExecutesFrom executes_from = ExecutesFrom::Flash;
  double base_execution_time = 0.0;  // s at the timing model's reference frequency
  bool transition_buffered = false;
  bool transition_unbuffered = false;

  bool has_transition(const DeviceConfig& config) const {
    return config.is_buffered() ? transition_buffered : transition_unbuffered;
  }
};

/// Reference execution times (seconds at reference_frequency, unbuffered).
struct PayloadTiming {
  double reference_frequency = 72e6;
  double buffered_scaling = 1.3;
  std::array<double, 5> base_time = {140e-6, 200e-6, 450e-6, 40e-6, 6e-6};

  double base(PayloadName p) const { return base_time[static_cast<std::size_t>(p)]; }
};

inline Payload make_payload(PayloadName name, const PayloadTiming& timing = {}) {
  using S = Subsystem;
  Payload p;
  p.name = name;
  p.base_execution_time = timing.base(name);
  switch (name) {
    case PayloadName::Matrix:
      p.activated_subsystems = {S::Flash, S::Sram, S::Alu, S::Pipeline};
      p.executes_from = ExecutesFrom::Flash;
      p.transition_buffered = p.transition_unbuffered = true;
      break;
    case PayloadName::FlashRead:
      p.activated_subsystems = {S::Flash, S::Alu};
      p.executes_from = ExecutesFrom::Flash;
      p.transition_unbuffered = true;
      break;
    case PayloadName::RamRw:
      p.activated_subsystems = {S::Sram, S::Flash, S::Alu};
      p.executes_from = ExecutesFrom::Flash;
      p.transition_unbuffered = true;
      break;
    case PayloadName::RamMarchC:
      p.activated_subsystems = {S::Sram, S::Alu};
      p.executes_from = ExecutesFrom::Sram;
      break;
    case PayloadName::CpuTest:
      p.activated_subsystems = {S::Alu};
      p.executes_from = ExecutesFrom::Sram;
      break;
  }
  return p;
}

inline double execution_time(const Payload& payload, double clock_hz, const DeviceConfig& config,
                             const PayloadTiming& timing = {}) {
  if (!(clock_hz > 0.0)) throw DomainError("execution_time: clock must be positive");
  const double scaling = config.is_buffered() ? timing.buffered_scaling : 1.0;
  return payload.base_execution_time * (timing.reference_frequency / clock_hz) * scaling;
}

// ---------------------------------------------------------------------------
// Error-transition model

enum class TransitionShape { Smoothstep, Linear };

struct ErrorTransitionModel {
  double onset_fraction = 1.06;  // MOF / MEF
  TransitionShape shape = TransitionShape::Smoothstep;

  /// Failure probability at normalized position x in [0, 1] past MEF.
  double failure_probability(double x) const {
    x = std::clamp(x, 0.0, 1.0);
    if (shape == TransitionShape::Linear) return x;
    return x * x * (3.0 - 2.0 * x);
  }

  void validate() const {
    if (!(onset_fraction >= 1.0)) throw ConfigError("transition onset fraction must be >= 1");
  }
};

// ---------------------------------------------------------------------------
// Functional bodies

/// Timing-induced corruption of one observed value; `selector` picks which.
struct Corruption {
  std::uint64_t selector = 0;
};

struct Verification {
  bool pass = true;
  std::string detail;

  static Verification ok() { return {}; }
  static Verification fail(std::string why) { return {false, std::move(why)}; }
};

struct MarchResult {
  bool pass = true;
  std::size_t address = 0;
  std::size_t element = 0;  // 0..5
};

/// March C-: up(w0); up(r0,w1); up(r1,w0); down(r0,w1); down(r1,w0); down(r0).
/// Words use solid all-zero / all-one backgrounds.
inline MarchResult march_c(Memory& memory, std::size_t words,
                           std::optional<Corruption> corruption = {}) {
  if (words < 1 || words > memory.size_words()) {
    throw ConfigError("march_c: region must hold between 1 word and the memory size");
  }
  constexpr Word kZero = 0;
  constexpr Word kOne = ~Word{0};
  // Reads happen in elements 1..5; a corruption hits exactly one of them.
  const std::size_t total_reads = 5 * words;
  const std::optional<std::size_t> corrupt_read =
      corruption ? std::optional(corruption->selector % total_reads) : std::nullopt;
  std::size_t read_index = 0;
  auto check = [&](std::size_t addr, Word expected) {
    Word v = memory.read(addr);
    if (corrupt_read == read_index++) v ^= Word{1};
    return v == expected;
  };

  for (std::size_t a = 0; a < words; ++a) memory.write(a, kZero);
  for (std::size_t a = 0; a < words; ++a) {
    if (!check(a, kZero)) return {false, a, 1};
    memory.write(a, kOne);
  }
  for (std::size_t a = 0; a < words; ++a) {
    if (!check(a, kOne)) return {false, a, 2};
    memory.write(a, kZero);
  }
  for (std::size_t a = words; a-- > 0;) {
    if (!check(a, kZero)) return {false, a, 3};
    memory.write(a, kOne);
  }
  for (std::size_t a = words; a-- > 0;) {
    if (!check(a, kOne)) return {false, a, 4};
    memory.write(a, kZero);
  }
  for (std::size_t a = words; a-- > 0;) {
    if (!check(a, kZero)) return {false, a, 5};
  }
  return {};
}

/// Writes the RAM test pattern over `bytes` bytes, reads it back and compares
/// the MD5 of what was read with `reference`.
inline Verification ram_rw(Memory& memory, std::size_t bytes, const Md5Digest& reference,
                           std::optional<Corruption> corruption = {}) {
  if (bytes < 64 || bytes % sizeof(Word) != 0 || bytes > memory.size_bytes()) {
    throw ConfigError("ram_rw: region must be a word multiple of at least 64 bytes");
  }
  for (std::size_t w = 0; w < bytes / sizeof(Word); ++w) {
    Word v = 0;
    for (std::size_t k = 0; k < 4; ++k) v |= Word{ram_pattern_byte(4 * w + k)} << (8 * k);
    memory.write(w, v);
  }
  std::vector<std::uint8_t> read_back(bytes);
  for (std::size_t w = 0; w < bytes / sizeof(Word); ++w) {
    const Word v = memory.read(w);
    for (std::size_t k = 0; k < 4; ++k) read_back[4 * w + k] = static_cast<std::uint8_t>(v >> (8 * k));
  }
  if (corruption) {
    const std::size_t flip_bit = corruption->selector % (bytes * 8);
    read_back[flip_bit / 8] ^= static_cast<std::uint8_t>(1u << (flip_bit % 8));
  }
  if (md5(std::span<const std::uint8_t>(read_back)) != reference) {
    return Verification::fail("ram_rw: digest mismatch");
  }
  return Verification::ok();
}

inline Verification flash_read(std::span<const std::uint8_t> region, const Md5Digest& reference,
                               std::optional<Corruption> corruption = {}) {
  if (region.empty()) throw ConfigError("flash_read: region must be non-empty");
  Md5 h;
  if (corruption) {
    const std::size_t flip_bit = corruption->selector % (region.size() * 8);
    const std::size_t at = flip_bit / 8;
    h.update(region.first(at));
    h.update(static_cast<std::uint8_t>(region[at] ^ (1u << (flip_bit % 8))));
    h.update(region.subspan(at + 1));
  } else {
    h.update(region);
  }
  if (h.finish() != reference) return Verification::fail("flash_read: digest mismatch");
  return Verification::ok();
}

inline constexpr std::size_t kMatrixWords = kMatrixDim * kMatrixDim;

/// Loads A and B into SRAM, multiplies them there, and checks the exact
/// determinant of the product read back from SRAM against `reference`.
inline Verification matrix_test(Memory& memory, const Matrix8& a, const Matrix8& b,
                                Int128 reference, std::optional<Corruption> corruption = {}) {
  if (memory.size_words() < 3 * kMatrixWords) {
    throw ConfigError("matrix_test: memory too small for operands and product");
  }
  auto at = [](std::size_t base, std::size_t i, std::size_t j) {
    return base + i * kMatrixDim + j;
  };
  constexpr std::size_t kA = 0, kB = kMatrixWords, kP = 2 * kMatrixWords;
  for (std::size_t i = 0; i < kMatrixDim; ++i) {
    for (std::size_t j = 0; j < kMatrixDim; ++j) {
      memory.write(at(kA, i, j), static_cast<Word>(static_cast<std::int32_t>(a[i][j])));
      memory.write(at(kB, i, j), static_cast<Word>(static_cast<std::int32_t>(b[i][j])));
    }
  }
  for (std::size_t i = 0; i < kMatrixDim; ++i) {
    for (std::size_t j = 0; j < kMatrixDim; ++j) {
      std::int64_t acc = 0;
      for (std::size_t k = 0; k < kMatrixDim; ++k) {
        acc += std::int64_t{static_cast<std::int32_t>(memory.read(at(kA, i, k)))} *
               static_cast<std::int32_t>(memory.read(at(kB, k, j)));
      }
      memory.write(at(kP, i, j), static_cast<Word>(static_cast<std::int32_t>(acc)));
    }
  }
  Matrix8 product{};
  for (std::size_t i = 0; i < kMatrixDim; ++i) {
    for (std::size_t j = 0; j < kMatrixDim; ++j) {
      product[i][j] = static_cast<std::int32_t>(memory.read(at(kP, i, j)));
    }
  }
  if (corruption) {
    const std::size_t cell = corruption->selector % kMatrixWords;
    const unsigned bit = static_cast<unsigned>((corruption->selector / kMatrixWords) % 16);
    product[cell / kMatrixDim][cell % kMatrixDim] ^= std::int64_t{1} << bit;
  }
  Int128 det = 0;
  try {
    det = determinant(product);
  } catch (const std::overflow_error&) {
    return Verification::fail("matrix_test: determinant overflow");
  }
  if (det != reference) return Verification::fail("matrix_test: determinant mismatch");
  return Verification::ok();
}

inline Verification cpu_test(std::optional<Corruption> corruption = {}) {
  const auto failed = cpu::run_battery(
      corruption ? std::optional(corruption->selector % cpu::kCheckCount) : std::nullopt);
  if (failed) return Verification::fail("cpu_test: check " + std::to_string(*failed) + " failed");
  return Verification::ok();
}

/// Dispatches the payload's functional body against the device memories.
inline Verification run_body(PayloadName name, SimulatedDevice& device,
                             std::optional<Corruption> corruption = {}) {
  const auto flash = device.flash_bytes();
  const FlashLayout& layout = device.flash_layout;
  switch (name) {
    case PayloadName::Matrix:
      return matrix_test(device.sram, read_matrix(flash, layout.matrix_a()),
                         read_matrix(flash, layout.matrix_b()),
                         read_int128(flash, layout.determinant()), corruption);
    case PayloadName::FlashRead:
      return flash_read(flash.first(layout.pattern_bytes),
                        read_digest(flash, layout.pattern_digest()), corruption);
    case PayloadName::RamRw:
      return ram_rw(device.sram, device.test_region_words * sizeof(Word),
                    read_digest(flash, layout.ram_digest()), corruption);
    case PayloadName::RamMarchC: {
      const MarchResult r = march_c(device.sram, device.test_region_words, corruption);
      if (r.pass) return Verification::ok();
      return Verification::fail("march_c: element " + std::to_string(r.element) + " address " +
                                std::to_string(r.address));
    }
    case PayloadName::CpuTest:
      return cpu_test(corruption);
  }
  return Verification::fail("unknown payload");
}

// ---------------------------------------------------------------------------
// Execution at a test clock

enum class OutcomeStatus { Pass, ComputeError, Hang };

struct PayloadOutcome {
  OutcomeStatus status = OutcomeStatus::Pass;
  std::string detail;
};

/// One payload run at `clock_hz`. Switches the device to the test clock, runs
/// the body, and returns to the standby clock. A Hang leaves the device hung
/// until power_cycle.
inline PayloadOutcome execute(const Payload& payload, SimulatedDevice& device,
                              const DeviceConfig& config, double clock_hz, Rng& rng,
                              const ErrorTransitionModel& transition = {}) {
  if (device.volatile_state.hung) {
    return {OutcomeStatus::Hang, "device hung; power cycle required"};
  }
  device.volatile_state.clock_hz = clock_hz;
  const double mef = device_mef_oracle(device, payload.activated_subsystems, config);

  auto hang = [&]() -> PayloadOutcome {
    device.volatile_state.hung = true;
    return {OutcomeStatus::Hang, "execution cannot continue"};
  };
  auto finish = [&](const Verification& v) -> PayloadOutcome {
    device.volatile_state.clock_hz = device.guard_band_frequency;
    ++device.volatile_state.completed_runs;
    if (v.pass) return {OutcomeStatus::Pass, {}};
    return {OutcomeStatus::ComputeError, v.detail};
  };

  if (clock_hz <= mef) return finish(run_body(payload.name, device));
  if (!payload.has_transition(config)) return hang();

  const double mof = transition.onset_fraction * mef;
  if (clock_hz > mof) return hang();
  const double position = (clock_hz - mef) / (mof - mef);
  if (rng.bernoulli(transition.failure_probability(position))) {
    Verification v = run_body(payload.name, device, Corruption{rng.next()});
    if (v.pass) v = Verification::fail("timing corruption escaped verification");
    return finish(v);
  }
  return finish(run_body(payload.name, device));
}

}  // namespace agemon

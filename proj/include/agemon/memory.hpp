#pragma once

// Word-addressed SRAM model with single injectable functional faults.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agemon/errors.hpp"

namespace agemon {

using Word = std::uint32_t;
inline constexpr unsigned kWordBits = 32;

enum class FaultKind { StuckAt0, StuckAt1, Transition, AddressDecoder, Coupling };

inline const char* to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::StuckAt0: return "stuck_at_0";
    case FaultKind::StuckAt1: return "stuck_at_1";
    case FaultKind::Transition: return "transition";
    case FaultKind::AddressDecoder: return "address_decoder";
    case FaultKind::Coupling: return "coupling";
  }
  return "?";
}

enum class TransitionDirection { Rising, Falling };

/// `address` is the faulty word. `parameter` is the aliased word for
/// AddressDecoder and the victim word for Coupling (aggressor = address).
/// `bit` selects the affected bit for every kind except AddressDecoder.
struct MemoryFault {
  FaultKind kind = FaultKind::StuckAt0;
  std::size_t address = 0;
  std::size_t parameter = 0;
  unsigned bit = 0;
  TransitionDirection direction = TransitionDirection::Rising;

  static MemoryFault stuck_at(bool one, std::size_t address, unsigned bit) {
    return {one ? FaultKind::StuckAt1 : FaultKind::StuckAt0, address, 0, bit, {}};
  }
  static MemoryFault transition(std::size_t address, unsigned bit, TransitionDirection dir) {
    return {FaultKind::Transition, address, 0, bit, dir};
  }
  static MemoryFault address_decoder(std::size_t address, std::size_t alias) {
    return {FaultKind::AddressDecoder, address, alias, 0, {}};
  }
  static MemoryFault coupling(std::size_t aggressor, std::size_t victim, unsigned bit) {
    return {FaultKind::Coupling, aggressor, victim, bit, {}};
  }

  friend bool operator==(const MemoryFault&, const MemoryFault&) = default;
};

class Memory {
 public:
  explicit Memory(std::size_t words = 0) : cells_(words, 0) {}

  std::size_t size_words() const { return cells_.size(); }
  std::size_t size_bytes() const { return cells_.size() * sizeof(Word); }

  const std::optional<MemoryFault>& fault() const { return fault_; }

  void inject(const MemoryFault& fault) {
    if (fault.address >= cells_.size()) {
      throw ConfigError("fault address " + std::to_string(fault.address) + " out of bounds");
    }
    if (fault.kind == FaultKind::AddressDecoder || fault.kind == FaultKind::Coupling) {
      if (fault.parameter >= cells_.size()) {
        throw ConfigError("fault parameter address " + std::to_string(fault.parameter) +
                          " out of bounds");
      }
      if (fault.parameter == fault.address) {
        throw ConfigError(std::string(to_string(fault.kind)) + " fault needs distinct addresses");
      }
    }
    if (fault.bit >= kWordBits) {
      throw ConfigError("fault bit index out of range");
    }
    fault_ = fault;
    cells_[fault.address] = apply_stuck(fault.address, cells_[fault.address]);
  }

  void clear_fault() { fault_.reset(); }

  /// Power-on state. The fault persists.
  void fill(Word value) {
    for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] = apply_stuck(i, value);
  }

  Word read(std::size_t address) const {
    if (!fault_) [[likely]] return cells_[address];
    const std::size_t target = resolve(address);
    return apply_stuck(target, cells_[target]);
  }

  void write(std::size_t address, Word value) {
    if (!fault_) [[likely]] {
      cells_[address] = value;
      return;
    }
    write_faulty(address, value);
  }

  /// Byte view helpers over the little-endian word store.
  std::uint8_t read_byte(std::size_t byte_address) const {
    return static_cast<std::uint8_t>(read(byte_address / 4) >> (8 * (byte_address % 4)));
  }

  void write_bytes(std::size_t byte_address, std::span<const std::uint8_t> bytes) {
    // whole-word writes; caller aligns to word boundaries
    for (std::size_t i = 0; i < bytes.size(); i += 4) {
      Word w = 0;
      for (std::size_t k = 0; k < 4 && i + k < bytes.size(); ++k) {
        w |= Word{bytes[i + k]} << (8 * k);
      }
      write((byte_address + i) / 4, w);
    }
  }

  friend bool operator==(const Memory&, const Memory&) = default;

 private:
  [[gnu::noinline]] void write_faulty(std::size_t address, Word value) {
    const std::size_t target = resolve(address);
    const Word old = cells_[target];
    Word stored = value;
    const MemoryFault& f = *fault_;
    if (f.kind == FaultKind::Transition && f.address == target) {
      const Word mask = Word{1} << f.bit;
      const bool was = old & mask;
      const bool want = value & mask;
      const bool blocked = f.direction == TransitionDirection::Rising ? (!was && want)
                                                                      : (was && !want);
      if (blocked) stored = (stored & ~mask) | (old & mask);
    }
    stored = apply_stuck(target, stored);
    cells_[target] = stored;
    if (f.kind == FaultKind::Coupling && f.address == target) {
      const Word mask = Word{1} << f.bit;
      if ((old ^ stored) & mask) cells_[f.parameter] ^= mask;
    }
  }

  std::size_t resolve(std::size_t address) const {
    if (fault_ && fault_->kind == FaultKind::AddressDecoder && fault_->address == address) {
      return fault_->parameter;
    }
    return address;
  }

  Word apply_stuck(std::size_t address, Word value) const {
    if (!fault_ || fault_->address != address) return value;
    const Word mask = Word{1} << fault_->bit;
    if (fault_->kind == FaultKind::StuckAt0) return value & ~mask;
    if (fault_->kind == FaultKind::StuckAt1) return value | mask;
    return value;
  }

  std::vector<Word> cells_;
  std::optional<MemoryFault> fault_;
};

}  // namespace agemon

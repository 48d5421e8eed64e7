#pragma once

// Microcontroller model: named critical paths whose delays follow the physics
// chain, SRAM with injectable faults, immutable flash, and power-cycle state.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "agemon/errors.hpp"
#include "agemon/flash_image.hpp"
#include "agemon/memory.hpp"
#include "agemon/physics.hpp"
#include "agemon/rng.hpp"

namespace agemon {

enum class Subsystem { Flash, Sram, Alu, Pipeline };

inline const char* to_string(Subsystem s) {
  switch (s) {
    case Subsystem::Flash: return "flash";
    case Subsystem::Sram: return "sram";
    case Subsystem::Alu: return "alu";
    case Subsystem::Pipeline: return "pipeline";
  }
  return "?";
}

using SubsystemSet = std::set<Subsystem>;

enum class FlashBuffering { Buffered, Unbuffered };

inline const char* to_string(FlashBuffering b) {
  return b == FlashBuffering::Buffered ? "buffered" : "unbuffered";
}

inline constexpr unsigned kMaxWaitStates = 2;

struct DeviceConfig {
  FlashBuffering flash_buffering = FlashBuffering::Unbuffered;
  unsigned wait_states = 0;

  static DeviceConfig buffered(unsigned max_wait_states = kMaxWaitStates) {
    return {FlashBuffering::Buffered, max_wait_states};
  }
  static DeviceConfig unbuffered() { return {FlashBuffering::Unbuffered, 0}; }

  bool is_buffered() const { return flash_buffering == FlashBuffering::Buffered; }

  void validate() const {
    if (!is_buffered() && wait_states != 0) {
      throw ConfigError("unbuffered configuration requires zero wait states");
    }
    if (is_buffered() && wait_states == 0) {
      throw ConfigError("buffered configuration requires the maximum wait states");
    }
  }

  friend bool operator==(const DeviceConfig&, const DeviceConfig&) = default;
};

struct CriticalPath {
  std::string id;
  Subsystem subsystem = Subsystem::Alu;
  unsigned gate_chain_length = 1;
  physics::GateLoad gate_load;
  physics::TransistorParams transistor;
};

/// Cleared by a power cycle.
struct VolatileState {
  bool hung = false;
  double clock_hz = 0.0;
  std::uint64_t completed_runs = 0;

  friend bool operator==(const VolatileState&, const VolatileState&) = default;
};

inline constexpr double kMinOperatingCelsius = -40.0;
inline constexpr double kMaxOperatingCelsius = 125.0;
inline constexpr Word kPowerOnPattern = 0;

struct SimulatedDevice {
  std::string device_id;
  std::vector<CriticalPath> paths;
  std::vector<double> process_variation;  // one factor per path
  Memory sram;
  std::size_t test_region_words = 256;
  std::shared_ptr<const std::vector<std::uint8_t>> flash;
  FlashLayout flash_layout;
  double temperature_c = 20.0;
  physics::AgeingState ageing;
  physics::MobilityModel mobility_model;
  double guard_band_frequency = 72e6;
  VolatileState volatile_state;

  std::span<const std::uint8_t> flash_bytes() const {
    return flash ? std::span<const std::uint8_t>(*flash) : std::span<const std::uint8_t>();
  }
};

inline double effective_path_delay(const SimulatedDevice& device, std::size_t path_index,
                                   const DeviceConfig& config) {
  if (device.temperature_c < kMinOperatingCelsius || device.temperature_c > kMaxOperatingCelsius) {
    throw DomainError("device temperature " + std::to_string(device.temperature_c) +
                      " C outside supported range");
  }
  const CriticalPath& path = device.paths.at(path_index);
  const double gate = physics::gate_delay(device.mobility_model, path.transistor, path.gate_load,
                                          device.ageing,
                                          physics::celsius_to_kelvin(device.temperature_c));
  double delay = path.gate_chain_length * gate * device.process_variation.at(path_index);
  if (path.subsystem == Subsystem::Flash && config.is_buffered()) {
    delay /= (1.0 + config.wait_states);
  }
  return delay;
}

/// Analytic maximum error-free frequency: the slowest activated path governs.
/// Returns +inf when no path of an activated subsystem exists.
inline double device_mef_oracle(const SimulatedDevice& device, const SubsystemSet& activated,
                                const DeviceConfig& config) {
  if (activated.empty()) {
    throw DomainError("device_mef_oracle: no activated subsystem");
  }
  double mef = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < device.paths.size(); ++i) {
    if (!activated.contains(device.paths[i].subsystem)) continue;
    mef = std::min(mef, physics::max_frequency(effective_path_delay(device, i, config)));
  }
  return mef;
}

/// Subsystem whose path sets the oracle MEF.
inline Subsystem governing_subsystem(const SimulatedDevice& device, const SubsystemSet& activated,
                                     const DeviceConfig& config) {
  double worst = -1.0;
  Subsystem governing = *activated.begin();
  for (std::size_t i = 0; i < device.paths.size(); ++i) {
    if (!activated.contains(device.paths[i].subsystem)) continue;
    const double d = effective_path_delay(device, i, config);
    if (d > worst) {
      worst = d;
      governing = device.paths[i].subsystem;
    }
  }
  return governing;
}

/// Closed boundary: a period of exactly 2 * delay still meets timing.
inline bool violates_timing_for_delay(double path_delay, double clock_hz) {
  return 1.0 / clock_hz < 2.0 * path_delay;
}

inline bool violates_timing(const SimulatedDevice& device, std::size_t path_index,
                            const DeviceConfig& config, double clock_hz) {
  if (!(clock_hz > 0.0)) throw DomainError("violates_timing: clock must be positive");
  return violates_timing_for_delay(effective_path_delay(device, path_index, config), clock_hz);
}

inline void inject_fault(SimulatedDevice& device, const MemoryFault& fault) {
  device.sram.inject(fault);
}

inline void power_cycle(SimulatedDevice& device) {
  device.sram.fill(kPowerOnPattern);
  device.volatile_state = VolatileState{};
  device.volatile_state.clock_hz = device.guard_band_frequency;
}

/// Static description from which a fleet of devices is built.
struct DeviceDescription {
  std::vector<CriticalPath> paths;
  std::size_t sram_bytes = 20 * 1024;
  std::size_t test_region_bytes = 1024;
  std::size_t flash_bytes = 128 * 1024;
  FlashLayout flash_layout;
  double guard_band_frequency = 72e6;
  double variation_min = 0.95;
  double variation_max = 1.05;

  void validate() const {
    if (paths.empty()) throw ConfigError("device needs at least one critical path");
    for (const auto& p : paths) {
      if (p.gate_chain_length < 1) throw ConfigError("path '" + p.id + "' needs chain length >= 1");
      if (!(p.gate_load.load_capacitance > 0)) {
        throw ConfigError("path '" + p.id + "' needs positive load capacitance");
      }
      p.transistor.validate();
    }
    if (sram_bytes % sizeof(Word) != 0 || sram_bytes == 0) {
      throw ConfigError("sram size must be a positive multiple of the word size");
    }
    if (test_region_bytes % sizeof(Word) != 0 || test_region_bytes < 64 ||
        test_region_bytes > 4096 || test_region_bytes > sram_bytes) {
      throw ConfigError("test region must be a word multiple in [64, 4096] bytes within sram");
    }
    if (!(variation_min >= 0.9 && variation_max <= 1.1 && variation_min <= variation_max)) {
      throw ConfigError("process variation range must lie within [0.9, 1.1]");
    }
    if (!(guard_band_frequency > 0)) throw ConfigError("guard band frequency must be positive");
    if (flash_layout.pattern_bytes == 0 || flash_bytes < flash_layout.end()) {
      throw ConfigError("flash must hold a non-empty pattern region and the reference block");
    }
  }
};

/// Builds a fresh device at 20 C with per-path process variation drawn from
/// `seed`, checking that the guard band is conservative for every path.
inline SimulatedDevice make_device(const DeviceDescription& description, std::string device_id,
                                   std::uint64_t seed, const physics::MobilityModel& mobility,
                                   std::shared_ptr<const std::vector<std::uint8_t>> flash) {
  description.validate();
  mobility.validate();
  SimulatedDevice device;
  device.device_id = std::move(device_id);
  device.paths = description.paths;
  Rng rng(derive_seed(seed, 0x7661726961ull));
  for (std::size_t i = 0; i < device.paths.size(); ++i) {
    device.process_variation.push_back(
        rng.uniform(description.variation_min, description.variation_max));
  }
  device.sram = Memory(description.sram_bytes / sizeof(Word));
  device.test_region_words = description.test_region_bytes / sizeof(Word);
  if (!flash || flash->size() != description.flash_bytes) {
    throw ConfigError("flash image size does not match the device description");
  }
  device.flash = std::move(flash);
  device.flash_layout = description.flash_layout;
  device.mobility_model = mobility;
  device.guard_band_frequency = description.guard_band_frequency;
  device.temperature_c = 20.0;
  for (std::size_t i = 0; i < device.paths.size(); ++i) {
    const double fmax =
        physics::max_frequency(effective_path_delay(device, i, DeviceConfig::unbuffered()));
    if (!(description.guard_band_frequency < fmax)) {
      throw ConfigError("guard band " + std::to_string(description.guard_band_frequency) +
                        " Hz is not below path '" + device.paths[i].id + "' f_max " +
                        std::to_string(fmax) + " Hz");
    }
  }
  power_cycle(device);
  return device;
}

}  // namespace agemon

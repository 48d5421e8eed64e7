#include <gtest/gtest.h>

#include <random>

#include "agemon/device.hpp"
#include "agemon/payloads.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace agemon;

namespace {

// Device with hand-set path delays for the closed-form examples. Chain length
// and variation scale a reference gate so that delays come out as requested.
SimulatedDevice device_with_delays(const std::vector<std::pair<Subsystem, double>>& delays) {
  SimulatedDevice d;
  d.device_id = "probe";
  d.temperature_c = 20.0;
  const double gate = physics::gate_delay(d.mobility_model, {}, {}, {}, physics::celsius_to_kelvin(20));
  for (const auto& [subsystem, delay] : delays) {
    d.paths.push_back({to_string(subsystem), subsystem, 1, {}, {}});
    d.process_variation.push_back(delay / gate);
  }
  d.sram = Memory(64);
  return d;
}

}  // namespace

// --- memory -----------------------------------------------------------------

TEST(Memory, IdealWriteReadIdentity) {
  Memory m(256);
  std::mt19937 gen(1);
  std::vector<Word> expect(256);
  for (std::size_t a = 0; a < 256; ++a) m.write(a, expect[a] = gen());
  for (std::size_t a = 0; a < 256; ++a) EXPECT_EQ(m.read(a), expect[a]);
}

TEST(Memory, StuckAt0ForcesBitLow) {
  Memory m(16);
  m.inject(MemoryFault::stuck_at(false, 5, 3));
  m.write(5, 0xFF);
  EXPECT_EQ(m.read(5), 0xF7u);
  EXPECT_EQ(m.read(5) & 0x08u, 0u);
  m.write(4, 0xFF);
  EXPECT_EQ(m.read(4), 0xFFu);
}

TEST(Memory, StuckAt1ForcesBitHigh) {
  Memory m(16);
  m.inject(MemoryFault::stuck_at(true, 2, 31));
  m.write(2, 0);
  EXPECT_EQ(m.read(2), 0x80000000u);
  m.fill(0);
  EXPECT_EQ(m.read(2), 0x80000000u);
}

TEST(Memory, TransitionFaultBlocksOneDirection) {
  Memory rising(4);
  rising.inject(MemoryFault::transition(1, 0, TransitionDirection::Rising));
  rising.write(1, 1);
  EXPECT_EQ(rising.read(1), 0u);

  Memory falling(4);
  falling.inject(MemoryFault::transition(1, 0, TransitionDirection::Falling));
  falling.write(1, 1);  // 0 -> 1 allowed
  EXPECT_EQ(falling.read(1), 1u);
  falling.write(1, 0);
  EXPECT_EQ(falling.read(1), 1u);
}

TEST(Memory, AddressDecoderAliases) {
  Memory m(16);
  m.inject(MemoryFault::address_decoder(3, 7));
  m.write(3, 0xAB);
  EXPECT_EQ(m.read(7), 0xABu);
  EXPECT_EQ(m.read(3), 0xABu);
  m.write(7, 0xCD);
  EXPECT_EQ(m.read(3), 0xCDu);
}

TEST(Memory, CouplingFlipsVictimOnAggressorTransition) {
  Memory m(16);
  m.inject(MemoryFault::coupling(2, 9, 4));
  m.write(9, 0);
  m.write(2, 0x10);  // bit 4 rises on the aggressor
  EXPECT_EQ(m.read(9), 0x10u);
  m.write(2, 0x10);  // no transition
  EXPECT_EQ(m.read(9), 0x10u);
  m.write(2, 0x00);
  EXPECT_EQ(m.read(9), 0x00u);
  m.write(2, 0x01);  // other bit, no effect
  EXPECT_EQ(m.read(9), 0x00u);
}

TEST(Memory, InjectRejectsInvalidFaults) {
  Memory m(16);
  EXPECT_THROW(m.inject(MemoryFault::stuck_at(true, 16, 0)), ConfigError);
  EXPECT_THROW(m.inject(MemoryFault::coupling(3, 3, 0)), ConfigError);
  EXPECT_THROW(m.inject(MemoryFault::coupling(3, 99, 0)), ConfigError);
  EXPECT_THROW(m.inject(MemoryFault::address_decoder(4, 4)), ConfigError);
  EXPECT_THROW(m.inject(MemoryFault::stuck_at(true, 0, 32)), ConfigError);
}

// --- effective delay, oracle, timing predicate --------------------------------

TEST(Device, FlashPathDelayDefinition) {
  auto d = fixture::default_device();
  d.paths[0].gate_chain_length = 400;
  ASSERT_EQ(d.paths[0].subsystem, Subsystem::Flash);
  const double gate = physics::gate_delay(d.mobility_model, d.paths[0].transistor,
                                          d.paths[0].gate_load, d.ageing,
                                          physics::celsius_to_kelvin(d.temperature_c));
  const double unbuffered = effective_path_delay(d, 0, DeviceConfig::unbuffered());
  EXPECT_NEAR(unbuffered, 400 * gate * d.process_variation[0], unbuffered * 1e-12);
  EXPECT_NEAR(effective_path_delay(d, 0, DeviceConfig::buffered(2)), unbuffered / 3,
              unbuffered * 1e-12);
}

TEST(Device, BufferingLeavesNonFlashPathsAlone) {
  auto d = fixture::default_device();
  for (std::size_t i = 1; i < d.paths.size(); ++i) {
    EXPECT_EQ(effective_path_delay(d, i, DeviceConfig::buffered()),
              effective_path_delay(d, i, DeviceConfig::unbuffered()));
  }
}

TEST(Device, HotterPathIsSlower) {
  auto d = fixture::default_device();
  for (std::size_t i = 0; i < d.paths.size(); ++i) {
    d.temperature_c = 20;
    const double cold = effective_path_delay(d, i, DeviceConfig::unbuffered());
    d.temperature_c = 80;
    const double hot = effective_path_delay(d, i, DeviceConfig::unbuffered());
    EXPECT_GT(hot, cold);
    // independent chain evaluation at both temperatures
    const auto& p = d.paths[i];
    const double expected_ratio =
        physics::gate_delay(d.mobility_model, p.transistor, p.gate_load, d.ageing, 353.15) /
        physics::gate_delay(d.mobility_model, p.transistor, p.gate_load, d.ageing, 293.15);
    EXPECT_NEAR(hot / cold, expected_ratio, 1e-12);
  }
}

TEST(Device, TemperatureOutsideRangeIsDomainError) {
  auto d = fixture::default_device();
  d.temperature_c = 130;
  EXPECT_THROW(effective_path_delay(d, 0, DeviceConfig::unbuffered()), DomainError);
  d.temperature_c = -41;
  EXPECT_THROW(effective_path_delay(d, 0, DeviceConfig::unbuffered()), DomainError);
}

TEST(Device, InoperableTransistorPropagates) {
  auto d = fixture::default_device();
  d.ageing.threshold_voltage_shift = 2.6;
  EXPECT_THROW(effective_path_delay(d, 0, DeviceConfig::unbuffered()),
               TransistorInoperable);
}

TEST(Oracle, SinglePathFiveNanoseconds) {
  auto d = device_with_delays({{Subsystem::Alu, 5e-9}});
  EXPECT_NEAR(device_mef_oracle(d, {Subsystem::Alu}, DeviceConfig::unbuffered()), 100e6, 1e-3);
}

TEST(Oracle, SlowestPathGoverns) {
  auto d = device_with_delays({{Subsystem::Alu, 5e-9}, {Subsystem::Sram, 4e-9}});
  const SubsystemSet both{Subsystem::Alu, Subsystem::Sram};
  EXPECT_NEAR(device_mef_oracle(d, both, DeviceConfig::unbuffered()), 100e6, 1e-3);
  EXPECT_EQ(governing_subsystem(d, both, DeviceConfig::unbuffered()), Subsystem::Alu);
  EXPECT_NEAR(device_mef_oracle(d, {Subsystem::Sram}, DeviceConfig::unbuffered()), 125e6, 1e-3);
}

TEST(Oracle, EmptyActivationIsDomainError) {
  auto d = fixture::default_device();
  EXPECT_THROW(device_mef_oracle(d, {}, DeviceConfig::unbuffered()), DomainError);
}

TEST(Oracle, FullDeviceDecreasesWithTemperature) {
  auto d = fixture::default_device();
  const SubsystemSet all{Subsystem::Flash, Subsystem::Sram, Subsystem::Alu, Subsystem::Pipeline};
  auto exhaustive = [&](const DeviceConfig& c) {
    double best = INFINITY;
    for (std::size_t i = 0; i < d.paths.size(); ++i) {
      best = std::min(best, 1.0 / (2.0 * effective_path_delay(d, i, c)));
    }
    return best;
  };
  for (auto c : {DeviceConfig::unbuffered(), DeviceConfig::buffered()}) {
    d.temperature_c = 20;
    const double cold = device_mef_oracle(d, all, c);
    EXPECT_NEAR(cold, exhaustive(c), cold * 1e-12);
    d.temperature_c = 80;
    const double hot = device_mef_oracle(d, all, c);
    EXPECT_NEAR(hot, exhaustive(c), hot * 1e-12);
    EXPECT_LT(hot, cold);
  }
}

TEST(Oracle, MonotoneDegradationOverRandomDevices) {
  const SubsystemSet all{Subsystem::Flash, Subsystem::Sram, Subsystem::Alu, Subsystem::Pipeline};
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> temp(-40, 120), shift(0, 1.0), factor(0.3, 1.0);
  const agemon::CampaignConfig config;
  const auto flash = campaign_flash_image(config);
  for (std::size_t k = 0; k < 100; ++k) {
    auto d = build_device(config, k, flash);
    d.temperature_c = temp(gen);
    d.ageing = {shift(gen), factor(gen)};
    for (auto c : {DeviceConfig::unbuffered(), DeviceConfig::buffered()}) {
      const double base = device_mef_oracle(d, all, c);
      auto hotter = d;
      hotter.temperature_c += 5;
      EXPECT_LE(device_mef_oracle(hotter, all, c), base);
      auto shifted = d;
      shifted.ageing.threshold_voltage_shift += 0.05;
      EXPECT_LE(device_mef_oracle(shifted, all, c), base);
      auto slower = d;
      slower.ageing.mobility_degradation_factor *= 0.95;
      EXPECT_LE(device_mef_oracle(slower, all, c), base);
    }
  }
}

TEST(Oracle, BufferedNeverBelowUnbufferedWhenFlashGoverns) {
  const agemon::CampaignConfig config;
  const auto flash = campaign_flash_image(config);
  for (std::size_t k = 0; k < 50; ++k) {
    auto d = build_device(config, k, flash);
    for (auto set : {SubsystemSet{Subsystem::Flash, Subsystem::Alu},
                     SubsystemSet{Subsystem::Flash, Subsystem::Sram, Subsystem::Alu},
                     SubsystemSet{Subsystem::Flash, Subsystem::Sram, Subsystem::Alu,
                                  Subsystem::Pipeline}}) {
      const double u = device_mef_oracle(d, set, DeviceConfig::unbuffered());
      const double b = device_mef_oracle(d, set, DeviceConfig::buffered());
      EXPECT_GE(b, u);
      if (governing_subsystem(d, set, DeviceConfig::unbuffered()) == Subsystem::Flash) {
        EXPECT_GT(b, u);
      }
    }
  }
}

TEST(Timing, ClosedBoundaryExamples) {
  EXPECT_FALSE(violates_timing_for_delay(5e-9, 99e6));
  EXPECT_TRUE(violates_timing_for_delay(5e-9, 101e6));
  // 1 / (2 * 0.5 ns) is exactly 1 GHz in binary floating point.
  EXPECT_FALSE(violates_timing_for_delay(0.5e-9, 1.0 / (2.0 * 0.5e-9)));
  auto d = device_with_delays({{Subsystem::Alu, 5e-9}});
  EXPECT_FALSE(violates_timing(d, 0, DeviceConfig::unbuffered(), 99e6));
  EXPECT_TRUE(violates_timing(d, 0, DeviceConfig::unbuffered(), 101e6));
  EXPECT_THROW(violates_timing(d, 0, DeviceConfig::unbuffered(), 0.0), DomainError);
}

TEST(Timing, BoundaryAtOracleFrequencyPasses) {
  auto d = fixture::default_device();
  for (std::size_t i = 0; i < d.paths.size(); ++i) {
    const double f = physics::max_frequency(effective_path_delay(d, i, DeviceConfig::unbuffered()));
    EXPECT_FALSE(violates_timing(d, i, DeviceConfig::unbuffered(), f));
    EXPECT_TRUE(violates_timing(d, i, DeviceConfig::unbuffered(), f * (1 + 1e-9)));
  }
}

TEST(Timing, MonotoneInClock) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> delay(1e-9, 20e-9), freq(1e6, 500e6);
  for (int i = 0; i < 10000; ++i) {
    const double d = delay(gen);
    double a = freq(gen), b = freq(gen);
    if (a > b) std::swap(a, b);
    if (violates_timing_for_delay(d, a)) {
      EXPECT_TRUE(violates_timing_for_delay(d, b));
    }
  }
}

// --- faults vs timing orthogonality ------------------------------------------

TEST(Device, FaultInjectionDoesNotChangeTiming) {
  auto d = fixture::default_device();
  const SubsystemSet all{Subsystem::Flash, Subsystem::Sram, Subsystem::Alu, Subsystem::Pipeline};
  const double before = device_mef_oracle(d, all, DeviceConfig::unbuffered());
  inject_fault(d, MemoryFault::stuck_at(true, 10, 3));
  EXPECT_EQ(device_mef_oracle(d, all, DeviceConfig::unbuffered()), before);
}

TEST(Device, TimingStateDoesNotChangeFaultBehaviour) {
  auto cold = fixture::default_device();
  auto hot = cold;
  hot.temperature_c = 80;
  hot.ageing = {0.2, 0.8};
  for (auto* d : {&cold, &hot}) {
    inject_fault(*d, MemoryFault::stuck_at(false, 7, 5));
    d->sram.write(7, 0xFFFFFFFF);
  }
  EXPECT_EQ(cold.sram, hot.sram);
}

TEST(Device, FaultedMarchFailsAtGuardBand) {
  auto d = fixture::default_device();
  inject_fault(d, MemoryFault::stuck_at(true, 10, 3));
  Rng rng(1);
  const auto out = execute(make_payload(PayloadName::RamMarchC), d, DeviceConfig::unbuffered(),
                           d.guard_band_frequency, rng);
  EXPECT_EQ(out.status, OutcomeStatus::ComputeError);
  EXPECT_NE(out.detail.find("address 10"), std::string::npos);
}

// --- power cycle ------------------------------------------------------------

TEST(PowerCycle, RecoversAfterHang) {
  auto d = fixture::default_device();
  const auto cpu = make_payload(PayloadName::CpuTest);
  const auto cfg = DeviceConfig::unbuffered();
  const double mef = device_mef_oracle(d, cpu.activated_subsystems, cfg);
  Rng rng(3);
  EXPECT_EQ(execute(cpu, d, cfg, mef * 1.01, rng).status, OutcomeStatus::Hang);
  EXPECT_EQ(execute(cpu, d, cfg, d.guard_band_frequency, rng).status, OutcomeStatus::Hang);
  power_cycle(d);
  for (auto name : kAllPayloads) {
    EXPECT_EQ(execute(make_payload(name), d, cfg, d.guard_band_frequency, rng).status,
              OutcomeStatus::Pass)
        << to_string(name);
  }
}

TEST(PowerCycle, IdempotentAndPreservesPersistentState) {
  auto d = fixture::default_device();
  d.temperature_c = 60;
  d.ageing = {0.1, 0.9};
  inject_fault(d, MemoryFault::coupling(1, 2, 0));
  d.sram.write(40, 1234);
  d.volatile_state.hung = true;
  d.volatile_state.completed_runs = 9;
  const auto variation = d.process_variation;
  const auto flash = d.flash;
  power_cycle(d);
  auto once = d;
  power_cycle(d);
  EXPECT_EQ(d.sram, once.sram);
  EXPECT_EQ(d.volatile_state, once.volatile_state);
  EXPECT_EQ(d.sram.read(40), 0u);
  EXPECT_FALSE(d.volatile_state.hung);
  EXPECT_EQ(d.volatile_state.clock_hz, d.guard_band_frequency);
  EXPECT_EQ(d.ageing, (physics::AgeingState{0.1, 0.9}));
  EXPECT_EQ(d.temperature_c, 60);
  EXPECT_EQ(d.process_variation, variation);
  EXPECT_EQ(d.flash, flash);
  EXPECT_TRUE(d.sram.fault().has_value());
}

// --- construction -----------------------------------------------------------

TEST(MakeDevice, VariationWithinBoundsAndSeeded) {
  const agemon::CampaignConfig config;
  const auto flash = campaign_flash_image(config);
  for (std::size_t k = 0; k < 50; ++k) {
    const auto d = build_device(config, k, flash);
    for (double v : d.process_variation) {
      EXPECT_GE(v, 0.95);
      EXPECT_LE(v, 1.05);
    }
    EXPECT_EQ(build_device(config, k, flash).process_variation, d.process_variation);
  }
  EXPECT_NE(build_device(config, 0, flash).process_variation,
            build_device(config, 1, flash).process_variation);
}

TEST(MakeDevice, GuardBandBelowEveryPath) {
  const auto d = fixture::default_device();
  for (std::size_t i = 0; i < d.paths.size(); ++i) {
    EXPECT_LT(d.guard_band_frequency,
              physics::max_frequency(effective_path_delay(d, i, DeviceConfig::unbuffered())));
  }
}

TEST(MakeDevice, RejectsNonConservativeGuardBand) {
  agemon::CampaignConfig config;
  config.device.guard_band_hz = 400e6;
  EXPECT_THROW(build_device(config, 0, campaign_flash_image(config)), ConfigError);
}

TEST(MakeDevice, RejectsBadDescriptions) {
  agemon::CampaignConfig config;
  const auto flash = campaign_flash_image(config);
  auto desc = config.device_description();
  desc.variation_max = 1.2;
  EXPECT_THROW(make_device(desc, "x", 1, {}, flash), ConfigError);
  desc = config.device_description();
  desc.paths[0].gate_chain_length = 0;
  EXPECT_THROW(make_device(desc, "x", 1, {}, flash), ConfigError);
  desc = config.device_description();
  desc.test_region_bytes = 8192;
  EXPECT_THROW(make_device(desc, "x", 1, {}, flash), ConfigError);
  desc = config.device_description();
  EXPECT_THROW(make_device(desc, "x", 1, {}, nullptr), ConfigError);
}

TEST(DeviceConfig, WaitStateInvariants) {
  EXPECT_NO_THROW(DeviceConfig::buffered().validate());
  EXPECT_NO_THROW(DeviceConfig::unbuffered().validate());
  EXPECT_THROW((DeviceConfig{FlashBuffering::Unbuffered, 1}.validate()), ConfigError);
  EXPECT_THROW((DeviceConfig{FlashBuffering::Buffered, 0}.validate()), ConfigError);
  EXPECT_EQ(DeviceConfig::buffered().wait_states, 2u);
}

#pragma once

// Campaign runner: builds the device fleet, walks the temperature ladder for
// every payload and flash configuration, and collects search outcomes and
// sweep profiles. Results are deterministic given the master seed and do not
// depend on thread count or completion order.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "agemon/campaign_config.hpp"
#include "agemon/controller.hpp"
#include "agemon/device.hpp"
#include "agemon/flash_image.hpp"
#include "agemon/payloads.hpp"
#include "agemon/rng.hpp"

namespace agemon {

/// One device x temperature x payload x configuration work unit.
struct CellResult {
  std::size_t device_index = 0;
  std::string device_id;
  std::size_t temperature_index = 0;
  double temperature_c = 0.0;
  PayloadName payload = PayloadName::Matrix;
  FlashBuffering config = FlashBuffering::Unbuffered;
  double oracle_mef_hz = 0.0;
  Subsystem governing = Subsystem::Flash;
  SearchOutcome search;
  std::vector<FrequencyResult> profile;
  double virtual_time_s = 0.0;
  std::uint64_t executions = 0;
};

struct CampaignResults {
  CampaignConfig config;
  std::shared_ptr<const std::vector<std::uint8_t>> flash_image;
  std::vector<CellResult> cells;  // sorted by device, temperature, payload, config

  double virtual_duration_s() const {
    double total = 0.0;
    for (const auto& c : cells) total += c.virtual_time_s;
    return total;
  }
};

inline std::string device_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "dut-%02zu", index + 1);
  return buf;
}

inline std::uint64_t device_seed(std::uint64_t master_seed, std::size_t device_index) {
  return derive_seed(master_seed, device_index);
}

/// Seed of one cell; keyed by enum values so a filtered run reproduces the
/// same cell of a full campaign.
inline std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t device_index,
                               std::size_t temperature_index, PayloadName payload,
                               FlashBuffering config) {
  return derive_seed(device_seed(master_seed, device_index),
                     {temperature_index, static_cast<std::uint64_t>(payload) + 16,
                      static_cast<std::uint64_t>(config) + 32});
}

inline std::shared_ptr<const std::vector<std::uint8_t>> campaign_flash_image(
    const CampaignConfig& config) {
  FlashLayout layout;
  layout.pattern_bytes = config.device.flash_pattern_bytes;
  return std::make_shared<const std::vector<std::uint8_t>>(build_flash_image(
      config.master_seed, config.device.flash_bytes, layout, config.device.test_region_bytes));
}

inline SimulatedDevice build_device(const CampaignConfig& config, std::size_t index,
                                    std::shared_ptr<const std::vector<std::uint8_t>> flash) {
  return make_device(config.device_description(), device_name(index),
                     device_seed(config.master_seed, index), config.physics.mobility_model(),
                     std::move(flash));
}

/// Every selected cell of one device, in report order.
inline std::vector<CellResult> simulate_device(
    const CampaignConfig& config, std::size_t index,
    const std::shared_ptr<const std::vector<std::uint8_t>>& flash,
    std::optional<PayloadName> only_payload = std::nullopt) {
  SimulatedDevice device = build_device(config, index, flash);
  std::vector<CellResult> cells;
  for (std::size_t ti = 0; ti < config.temperatures_c.size(); ++ti) {
    device.temperature_c = config.temperatures_c[ti];
    device.ageing = config.ageing_at(ti);
    for (PayloadName name : config.payloads) {
      if (only_payload && *only_payload != name) continue;
      const Payload payload = make_payload(name, config.timing);
      for (FlashBuffering buffering : config.configs) {
        const DeviceConfig dc = config.device_config(buffering);
        power_cycle(device);
        CellResult cell;
        cell.device_index = index;
        cell.device_id = device.device_id;
        cell.temperature_index = ti;
        cell.temperature_c = device.temperature_c;
        cell.payload = name;
        cell.config = buffering;
        cell.oracle_mef_hz = device_mef_oracle(device, payload.activated_subsystems, dc);
        cell.governing = governing_subsystem(device, payload.activated_subsystems, dc);
        Controller controller(device, payload, dc, config.search,
                              cell_seed(config.master_seed, index, ti, name, buffering),
                              config.transition_model(), config.timing);
        cell.search = controller.find_mef();
        if (config.sweep) {
          cell.profile = controller.sweep(config.sweep_low_fraction * cell.search.mef,
                                          config.sweep_high_fraction * cell.search.mef,
                                          config.sweep_step_hz);
        }
        cell.virtual_time_s = controller.virtual_time();
        cell.executions = controller.executions();
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

/// Runs the whole campaign in memory. Any failure propagates; no partial
/// results are returned.
inline CampaignResults run_campaign(const CampaignConfig& config) {
  CampaignResults results;
  results.config = config;
  results.flash_image = campaign_flash_image(config);

  std::vector<std::vector<CellResult>> per_device(config.device_count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < config.device_count;) {
      try {
        per_device[i] = simulate_device(config, i, results.flash_image);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min(config.threads, config.device_count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  for (auto& cells : per_device) {
    for (auto& c : cells) results.cells.push_back(std::move(c));
  }
  std::stable_sort(results.cells.begin(), results.cells.end(),
                   [](const CellResult& a, const CellResult& b) {
                     return std::tuple(a.device_index, a.temperature_index, a.payload, a.config) <
                            std::tuple(b.device_index, b.temperature_index, b.payload, b.config);
                   });
  return results;
}

}  // namespace agemon

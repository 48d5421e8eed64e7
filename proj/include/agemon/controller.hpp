#pragma once

// Test controller: batches of payload runs at a test clock, bisection search
// for the maximum error-free frequency (MEF), and frequency sweeps for
// error-transition profiles. Time is simulated, never wall-clock.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "agemon/device.hpp"
#include "agemon/errors.hpp"
#include "agemon/payloads.hpp"
#include "agemon/rng.hpp"

namespace agemon {

struct SearchConfig {
  double f_min = 1e6;
  double f_max = 200e6;
  double step = 10e3;
  unsigned runs_per_frequency = 500;
  double watchdog_timeout = 0.1;  // s charged per hang

  void validate() const {
    if (!(f_min > 0 && f_min < f_max)) throw ConfigError("search requires 0 < f_min < f_max");
    if (!(step > 0)) throw ConfigError("search step must be positive");
    if (runs_per_frequency < 1) throw ConfigError("runs_per_frequency must be >= 1");
    if (!(watchdog_timeout >= 0)) throw ConfigError("watchdog timeout must be non-negative");
  }

  /// Upper bound on distinct probes of one bisection.
  std::size_t probe_budget() const {
    return static_cast<std::size_t>(std::ceil(std::log2((f_max - f_min) / step))) + 2;
  }

  friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

struct FrequencyResult {
  double frequency = 0.0;
  unsigned passes = 0;
  unsigned compute_errors = 0;
  unsigned hangs = 0;
  double virtual_time_s = 0.0;  // controller clock after the batch

  unsigned runs() const { return passes + compute_errors + hangs; }
  bool error_free() const { return compute_errors == 0 && hangs == 0; }
  bool all_failed() const { return runs() > 0 && passes == 0; }
  double error_fraction() const { return runs() ? double(compute_errors + hangs) / runs() : 0.0; }
  double hang_fraction() const { return runs() ? double(hangs) / runs() : 0.0; }

  friend bool operator==(const FrequencyResult&, const FrequencyResult&) = default;
};

struct SearchOutcome {
  double mef = 0.0;
  std::optional<double> mof;
  std::vector<FrequencyResult> trace;
  std::uint64_t total_test_executions = 0;
  bool range_exhausted = false;
};

/// Lowest probed frequency at which every run failed.
inline std::optional<double> detect_mof(const std::vector<FrequencyResult>& trace) {
  if (trace.empty()) throw DomainError("detect_mof: empty trace");
  std::optional<double> mof;
  for (const auto& r : trace) {
    if (r.all_failed() && (!mof || r.frequency < *mof)) mof = r.frequency;
  }
  return mof;
}

/// Drives one device with one payload under one flash configuration.
class Controller {
 public:
  Controller(SimulatedDevice& device, Payload payload, DeviceConfig config, SearchConfig search,
             std::uint64_t seed, ErrorTransitionModel transition = {}, PayloadTiming timing = {})
      : device_(device),
        payload_(std::move(payload)),
        config_(config),
        search_(search),
        transition_(transition),
        timing_(timing),
        rng_(seed) {
    config_.validate();
    search_.validate();
    transition_.validate();
  }

  double virtual_time() const { return virtual_time_; }
  std::uint64_t executions() const { return executions_; }
  const SearchConfig& search() const { return search_; }

  /// N runs at `frequency`. Each hang costs one watchdog timeout and a power
  /// cycle before the next run.
  FrequencyResult run_at_frequency(double frequency, unsigned runs) {
    if (frequency < search_.f_min || frequency > search_.f_max) {
      throw DomainError("run_at_frequency: " + std::to_string(frequency) +
                        " Hz outside the search range");
    }
    FrequencyResult result;
    result.frequency = frequency;
    const double run_time = execution_time(payload_, frequency, config_, timing_);
    for (unsigned i = 0; i < runs; ++i) {
      const PayloadOutcome outcome =
          execute(payload_, device_, config_, frequency, rng_, transition_);
      ++executions_;
      switch (outcome.status) {
        case OutcomeStatus::Pass:
          ++result.passes;
          virtual_time_ += run_time;
          break;
        case OutcomeStatus::ComputeError:
          ++result.compute_errors;
          virtual_time_ += run_time;
          break;
        case OutcomeStatus::Hang:
          ++result.hangs;
          virtual_time_ += search_.watchdog_timeout;
          power_cycle(device_);
          break;
      }
    }
    result.virtual_time_s = virtual_time_;
    return result;
  }

  FrequencyResult run_at_frequency(double frequency) {
    return run_at_frequency(frequency, search_.runs_per_frequency);
  }

  /// Bisection between f_min and f_max down to `step`. Invariant: lo is the
  /// highest probed error-free frequency, hi the lowest erroneous one.
  /// Midpoints sit on the grid f_min + k * step (f_max closes the grid), so
  /// the result is directly comparable with a sweep at the same step.
  SearchOutcome find_mef() {
    SearchOutcome out;
    auto probe = [&](double f) {
      out.trace.push_back(run_at_frequency(f));
      out.total_test_executions += out.trace.back().runs();
      return out.trace.back().error_free();
    };

    if (!probe(search_.f_min)) {
      throw DeviceBelowMinimum("payload " + std::string(to_string(payload_.name)) +
                               " fails at f_min on device " + device_.device_id);
    }
    if (probe(search_.f_max)) {
      out.mef = search_.f_max;
      out.range_exhausted = true;
      out.mof = detect_mof(out.trace);
      return out;
    }
    std::uint64_t lo = 0;
    std::uint64_t hi = grid_points() - 1;
    while (hi - lo > 1) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      (probe(grid_frequency(mid)) ? lo : hi) = mid;
    }
    out.mef = grid_frequency(lo);
    out.mof = detect_mof(out.trace);
    return out;
  }

  /// Inclusive grid from..to; points outside [f_min, f_max] are skipped.
  std::vector<FrequencyResult> sweep(double from, double to, double step) {
    if (!(from < to)) throw DomainError("sweep: from must be below to");
    if (!(step > 0)) throw DomainError("sweep: step must be positive");
    std::vector<FrequencyResult> profile;
    for (double f : sweep_grid(from, to, step)) {
      if (f < search_.f_min || f > search_.f_max) continue;
      profile.push_back(run_at_frequency(f));
    }
    return profile;
  }

  static std::vector<double> sweep_grid(double from, double to, double step) {
    const auto points = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
    std::vector<double> grid;
    grid.reserve(points);
    for (std::size_t i = 0; i < points; ++i) grid.push_back(from + step * static_cast<double>(i));
    return grid;
  }

 private:
  std::uint64_t grid_points() const {
    return static_cast<std::uint64_t>(
               std::ceil((search_.f_max - search_.f_min) / search_.step - 1e-9)) + 1;
  }

  double grid_frequency(std::uint64_t k) const {
    return std::min(search_.f_min + static_cast<double>(k) * search_.step, search_.f_max);
  }

  SimulatedDevice& device_;
  Payload payload_;
  DeviceConfig config_;
  SearchConfig search_;
  ErrorTransitionModel transition_;
  PayloadTiming timing_;
  Rng rng_;
  double virtual_time_ = 0.0;
  std::uint64_t executions_ = 0;
};

}  // namespace agemon

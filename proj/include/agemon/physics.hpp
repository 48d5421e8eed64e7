#pragma once

// Transistor-level delay model: temperature and ageing state to gate
// propagation delay and maximum toggle frequency. All quantities SI.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "agemon/errors.hpp"

namespace agemon::physics {

inline constexpr double kKelvinOffset = 273.15;

inline double celsius_to_kelvin(double celsius) { return celsius + kKelvinOffset; }
inline double kelvin_to_celsius(double kelvin) { return kelvin - kKelvinOffset; }

struct TransistorParams {
  double oxide_capacitance = 0.01;   // F/m^2
  double channel_width = 10e-6;      // m
  double channel_length = 1e-6;      // m
  double supply_voltage = 3.3;       // V
  double threshold_voltage_fresh = 0.7;  // V

  double aspect_ratio() const { return channel_width / channel_length; }

  void validate() const {
    if (!(oxide_capacitance > 0 && channel_width > 0 && channel_length > 0 &&
          supply_voltage > 0 && threshold_voltage_fresh > 0)) {
      throw ConfigError("transistor parameters must be strictly positive");
    }
    if (!(supply_voltage > threshold_voltage_fresh)) {
      throw ConfigError("supply voltage must exceed the fresh threshold voltage");
    }
  }

  friend bool operator==(const TransistorParams&, const TransistorParams&) = default;
};

/// Additional scattering-limited mobility term combined harmonically with the
/// phonon term (surface roughness, bulk or interface coulombic scattering).
struct ScatteringTerm {
  std::string label;
  std::function<double(double kelvin)> mobility;
};

struct MobilityModel {
  double mu_ph0 = 0.04;                 // m^2/(V s) at reference_temperature
  double reference_temperature = 293.15;  // K
  double theta = 0.8;
  double alpha = 1.0;
  std::vector<ScatteringTerm> optional_scattering_terms;

  void validate() const {
    if (!(mu_ph0 > 0 && reference_temperature > 0 && theta > 0 && alpha > 0)) {
      throw ConfigError("mobility model parameters must be strictly positive");
    }
  }
};

struct AgeingState {
  double threshold_voltage_shift = 0.0;     // V
  double mobility_degradation_factor = 1.0;  // (0, 1]

  bool fresh() const {
    return threshold_voltage_shift == 0.0 && mobility_degradation_factor == 1.0;
  }

  void validate() const {
    if (!(threshold_voltage_shift >= 0.0)) {
      throw ConfigError("threshold voltage shift must be non-negative");
    }
    if (!(mobility_degradation_factor > 0.0 && mobility_degradation_factor <= 1.0)) {
      throw ConfigError("mobility degradation factor must lie in (0, 1]");
    }
  }

  friend bool operator==(const AgeingState&, const AgeingState&) = default;
};

struct GateLoad {
  double load_capacitance = 1e-14;  // F

  friend bool operator==(const GateLoad&, const GateLoad&) = default;
};

/// Lattice (phonon) limited mobility: mu_ph0 * (T0 / T)^theta.
inline double phonon_mobility(const MobilityModel& model, double kelvin) {
  if (!(kelvin > 0.0)) {
    throw DomainError("phonon_mobility: temperature must be positive");
  }
  return model.mu_ph0 * std::pow(model.reference_temperature / kelvin, model.theta);
}

/// Matthiessen-style harmonic combination of the phonon term with every
/// configured scattering term, scaled by alpha.
inline double effective_mobility(const MobilityModel& model, double kelvin) {
  double inverse_sum = 1.0 / phonon_mobility(model, kelvin);
  for (const auto& term : model.optional_scattering_terms) {
    const double mu = term.mobility(kelvin);
    if (!(mu > 0.0)) {
      throw DomainError("effective_mobility: scattering term '" + term.label +
                        "' is non-positive");
    }
    inverse_sum += 1.0 / mu;
  }
  return model.alpha / inverse_sum;
}

/// Saturation drain current. Ageing raises the threshold and scales mobility.
inline double drain_current(const TransistorParams& params, double mobility,
                            const AgeingState& ageing) {
  const double threshold = params.threshold_voltage_fresh + ageing.threshold_voltage_shift;
  if (!(params.supply_voltage > threshold)) {
    throw TransistorInoperable("drain_current: effective threshold voltage " +
                               std::to_string(threshold) + " V reaches supply voltage");
  }
  const double overdrive = params.supply_voltage - threshold;
  return 0.5 * (mobility * ageing.mobility_degradation_factor) * params.oxide_capacitance *
         params.aspect_ratio() * overdrive * overdrive;
}

inline double propagation_time(const GateLoad& load, const TransistorParams& params,
                               double current) {
  if (!(current > 0.0)) {
    throw DomainError("propagation_time: drain current must be positive");
  }
  return load.load_capacitance * params.supply_voltage / current;
}

/// A full low-high-low transition fits in one period: f = 1 / (2 t_p).
inline double max_frequency(double propagation) {
  if (!(propagation > 0.0)) {
    throw DomainError("max_frequency: propagation time must be positive");
  }
  return 1.0 / (2.0 * propagation);
}

/// Single-gate delay at a temperature, composing the whole chain above.
inline double gate_delay(const MobilityModel& model, const TransistorParams& params,
                         const GateLoad& load, const AgeingState& ageing, double kelvin) {
  const double mu = effective_mobility(model, kelvin);
  return propagation_time(load, params, drain_current(params, mu, ageing));
}

}  // namespace agemon::physics

#pragma once

#include <stdexcept>
#include <string>

namespace agemon {

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Effective threshold voltage reached the supply: the transistor cannot switch.
struct TransistorInoperable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value (device description, fault, campaign file).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Payload fails already at the lowest search frequency.
struct DeviceBelowMinimum : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ReportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace agemon

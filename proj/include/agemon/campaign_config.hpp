#pragma once

// Campaign configuration: INI grammar, defaults, validation that collects
// every error, and a resolved echo that re-validates to the same config.
//
// Grammar: `[section]` headers and `key = value` lines; `;` or `#` start a
// comment line. Lists are comma separated. Unknown sections or keys are
// errors. Temperatures are given in degrees Celsius.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <concepts>
#include <memory>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "agemon/controller.hpp"
#include "agemon/device.hpp"
#include "agemon/payloads.hpp"
#include "agemon/physics.hpp"

namespace agemon {

struct PhysicsCalibration {
  double mu_ph0 = 0.04;
  double reference_temperature_k = 293.15;
  double theta = 0.8;
  double alpha = 1.0;
  physics::TransistorParams transistor;
  physics::GateLoad gate_load;

  physics::MobilityModel mobility_model() const {
    physics::MobilityModel m;
    m.mu_ph0 = mu_ph0;
    m.reference_temperature = reference_temperature_k;
    m.theta = theta;
    m.alpha = alpha;
    return m;
  }

  friend bool operator==(const PhysicsCalibration&, const PhysicsCalibration&) = default;
};

/// Gate chain lengths per subsystem path. With the default physics one gate
/// delays ~2.44 ps at 20 C, placing fresh unbuffered path limits near
/// flash 125, pipeline 145, sram 165 and alu 180 MHz.
struct DeviceCalibration {
  unsigned flash_chain = 1639;
  unsigned sram_chain = 1242;
  unsigned alu_chain = 1138;
  unsigned pipeline_chain = 1413;
  unsigned wait_states = kMaxWaitStates;
  double guard_band_hz = 72e6;
  std::size_t sram_bytes = 20 * 1024;
  std::size_t flash_bytes = 128 * 1024;
  std::size_t test_region_bytes = 1024;
  std::size_t flash_pattern_bytes = 2048;
  double variation_min = 0.95;
  double variation_max = 1.05;

  friend bool operator==(const DeviceCalibration&, const DeviceCalibration&) = default;
};

struct CampaignConfig {
  unsigned device_count = 8;
  std::vector<double> temperatures_c = {20, 30, 40, 50, 60, 70, 80};
  std::vector<PayloadName> payloads = {kAllPayloads.begin(), kAllPayloads.end()};
  std::vector<FlashBuffering> configs = {FlashBuffering::Buffered, FlashBuffering::Unbuffered};
  std::uint64_t master_seed = 1;
  std::string output_dir = "report";
  bool sweep = true;
  double sweep_low_fraction = 0.9;
  double sweep_high_fraction = 1.15;
  double sweep_step_hz = 0.5e6;
  unsigned threads = 1;
  SearchConfig search;
  PhysicsCalibration physics;
  DeviceCalibration device;
  double transition_onset = 1.06;
  TransitionShape transition_shape = TransitionShape::Smoothstep;
  PayloadTiming timing;
  std::vector<double> threshold_voltage_shift_v;  // empty, one value, or one per temperature
  std::vector<double> mobility_factor;

  DeviceConfig device_config(FlashBuffering b) const {
    return b == FlashBuffering::Buffered ? DeviceConfig::buffered(device.wait_states)
                                         : DeviceConfig::unbuffered();
  }

  ErrorTransitionModel transition_model() const { return {transition_onset, transition_shape}; }

  physics::AgeingState ageing_at(std::size_t temperature_index) const {
    physics::AgeingState a;
    auto pick = [&](const std::vector<double>& v, double fallback) {
      if (v.empty()) return fallback;
      return v.size() == 1 ? v.front() : v.at(temperature_index);
    };
    a.threshold_voltage_shift = pick(threshold_voltage_shift_v, 0.0);
    a.mobility_degradation_factor = pick(mobility_factor, 1.0);
    return a;
  }

  DeviceDescription device_description() const {
    DeviceDescription d;
    auto path = [&](const char* id, Subsystem s, unsigned chain) {
      return CriticalPath{id, s, chain, physics.gate_load, physics.transistor};
    };
    d.paths = {path("flash", Subsystem::Flash, device.flash_chain),
               path("sram", Subsystem::Sram, device.sram_chain),
               path("alu", Subsystem::Alu, device.alu_chain),
               path("pipeline", Subsystem::Pipeline, device.pipeline_chain)};
    d.sram_bytes = device.sram_bytes;
    d.flash_bytes = device.flash_bytes;
    d.test_region_bytes = device.test_region_bytes;
    d.flash_layout.pattern_bytes = device.flash_pattern_bytes;
    d.guard_band_frequency = device.guard_band_hz;
    d.variation_min = device.variation_min;
    d.variation_max = device.variation_max;
    return d;
  }

  friend bool operator==(const CampaignConfig& a, const CampaignConfig& b) {
    return a.device_count == b.device_count && a.temperatures_c == b.temperatures_c &&
           a.payloads == b.payloads && a.configs == b.configs && a.master_seed == b.master_seed &&
           a.output_dir == b.output_dir && a.sweep == b.sweep &&
           a.sweep_low_fraction == b.sweep_low_fraction &&
           a.sweep_high_fraction == b.sweep_high_fraction && a.sweep_step_hz == b.sweep_step_hz &&
           a.threads == b.threads && a.search == b.search && a.physics == b.physics &&
           a.device == b.device && a.transition_onset == b.transition_onset &&
           a.transition_shape == b.transition_shape &&
           a.timing.reference_frequency == b.timing.reference_frequency &&
           a.timing.buffered_scaling == b.timing.buffered_scaling &&
           a.timing.base_time == b.timing.base_time &&
           a.threshold_voltage_shift_v == b.threshold_voltage_shift_v &&
           a.mobility_factor == b.mobility_factor;
  }
};

inline constexpr const char* kOutputDirEnv = "AGEMON_OUTPUT_DIR";

struct ValidationResult {
  CampaignConfig config;
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
};

namespace config_detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline bool parse_number(const std::string& text, double& out) {
  const std::string t = trim(text);
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return !t.empty() && end == t.c_str() + t.size() && std::isfinite(out);
}

template <class Int>
inline bool parse_integer(const std::string& text, Int& out) {
  const std::string t = trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc{} && ptr == t.data() + t.size();
}

inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Reads keys out of a ptree, recording which ones were consumed and every
/// conversion failure.
class Reader {
 public:
  Reader(const boost::property_tree::ptree& tree, std::vector<std::string>& errors)
      : tree_(tree), errors_(errors) {}

  template <class T>
  void get(const std::string& section, const std::string& key, T& target) {
    const std::string name = section + "." + key;
    known_.insert(name);
    const auto node = tree_.get_child_optional(boost::property_tree::ptree::path_type(name, '.'));
    if (!node) return;
    const std::string raw = node->data();
    if (!assign(raw, target)) errors_.push_back(name + ": cannot parse '" + raw + "'");
  }

  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty() && !body.data().empty()) {
        errors_.push_back("unknown top-level key '" + section + "'");
        continue;
      }
      const bool section_known = std::any_of(known_.begin(), known_.end(), [&](const auto& k) {
        return k.starts_with(section + ".");
      });
      if (!section_known) {
        errors_.push_back("unknown section '[" + section + "]'");
        continue;
      }
      for (const auto& [key, value] : body) {
        const std::string name = section + "." + key;
        if (!known_.contains(name)) errors_.push_back("unknown key '" + name + "'");
      }
    }
  }

 private:
  static bool assign(const std::string& raw, double& t) { return parse_number(raw, t); }
  template <std::unsigned_integral Int>
  static bool assign(const std::string& raw, Int& t) {
    return parse_integer(raw, t);
  }
  static bool assign(const std::string& raw, std::string& t) {
    t = trim(raw);
    return true;
  }
  static bool assign(const std::string& raw, bool& t) {
    const std::string v = trim(raw);
    if (v == "true" || v == "1" || v == "yes") return (t = true), true;
    if (v == "false" || v == "0" || v == "no") return (t = false), true;
    return false;
  }
  static bool assign(const std::string& raw, std::vector<double>& t) {
    t.clear();
    for (const auto& item : split_list(raw)) {
      double v;
      if (!parse_number(item, v)) return false;
      t.push_back(v);
    }
    return true;
  }
  static bool assign(const std::string& raw, std::vector<PayloadName>& t) {
    t.clear();
    for (const auto& item : split_list(raw)) {
      const auto p = parse_payload(item);
      if (!p) return false;
      t.push_back(*p);
    }
    return true;
  }
  static bool assign(const std::string& raw, std::vector<FlashBuffering>& t) {
    t.clear();
    for (const auto& item : split_list(raw)) {
      if (item == "buffered") t.push_back(FlashBuffering::Buffered);
      else if (item == "unbuffered") t.push_back(FlashBuffering::Unbuffered);
      else return false;
    }
    return true;
  }
  static bool assign(const std::string& raw, TransitionShape& t) {
    const std::string v = trim(raw);
    if (v == "smoothstep") return (t = TransitionShape::Smoothstep), true;
    if (v == "linear") return (t = TransitionShape::Linear), true;
    return false;
  }

  const boost::property_tree::ptree& tree_;
  std::vector<std::string>& errors_;
  std::set<std::string> known_;
};

}  // namespace config_detail

/// Parses INI text, injects defaults for absent keys and checks every
/// constraint; all problems are reported, not just the first.
inline ValidationResult validate_config(const std::string& text) {
  ValidationResult result;
  auto& errors = result.errors;
  auto& c = result.config;

  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    errors.push_back("syntax error at line " + std::to_string(e.line()) + ": " + e.message());
    return result;
  }

  config_detail::Reader r(tree, errors);
  r.get("campaign", "device_count", c.device_count);
  r.get("campaign", "temperatures_c", c.temperatures_c);
  r.get("campaign", "payloads", c.payloads);
  r.get("campaign", "configs", c.configs);
  r.get("campaign", "master_seed", c.master_seed);
  r.get("campaign", "output_dir", c.output_dir);
  r.get("campaign", "sweep", c.sweep);
  r.get("campaign", "sweep_low_fraction", c.sweep_low_fraction);
  r.get("campaign", "sweep_high_fraction", c.sweep_high_fraction);
  r.get("campaign", "sweep_step_hz", c.sweep_step_hz);
  r.get("campaign", "threads", c.threads);

  r.get("search", "f_min_hz", c.search.f_min);
  r.get("search", "f_max_hz", c.search.f_max);
  r.get("search", "step_hz", c.search.step);
  r.get("search", "runs_per_frequency", c.search.runs_per_frequency);
  r.get("search", "watchdog_timeout_s", c.search.watchdog_timeout);

  r.get("physics", "mu_ph0", c.physics.mu_ph0);
  r.get("physics", "reference_temperature_k", c.physics.reference_temperature_k);
  r.get("physics", "theta", c.physics.theta);
  r.get("physics", "alpha", c.physics.alpha);
  r.get("physics", "oxide_capacitance", c.physics.transistor.oxide_capacitance);
  r.get("physics", "channel_width", c.physics.transistor.channel_width);
  r.get("physics", "channel_length", c.physics.transistor.channel_length);
  r.get("physics", "supply_voltage", c.physics.transistor.supply_voltage);
  r.get("physics", "threshold_voltage", c.physics.transistor.threshold_voltage_fresh);
  r.get("physics", "load_capacitance", c.physics.gate_load.load_capacitance);

  r.get("device", "flash_chain", c.device.flash_chain);
  r.get("device", "sram_chain", c.device.sram_chain);
  r.get("device", "alu_chain", c.device.alu_chain);
  r.get("device", "pipeline_chain", c.device.pipeline_chain);
  r.get("device", "wait_states", c.device.wait_states);
  r.get("device", "guard_band_hz", c.device.guard_band_hz);
  r.get("device", "sram_bytes", c.device.sram_bytes);
  r.get("device", "flash_bytes", c.device.flash_bytes);
  r.get("device", "test_region_bytes", c.device.test_region_bytes);
  r.get("device", "flash_pattern_bytes", c.device.flash_pattern_bytes);
  r.get("device", "variation_min", c.device.variation_min);
  r.get("device", "variation_max", c.device.variation_max);

  r.get("transition", "onset_fraction", c.transition_onset);
  r.get("transition", "shape", c.transition_shape);

  r.get("timing", "reference_frequency_hz", c.timing.reference_frequency);
  r.get("timing", "buffered_scaling", c.timing.buffered_scaling);
  for (auto p : kAllPayloads) {
    r.get("timing", std::string(to_string(p)) + "_s",
          c.timing.base_time[static_cast<std::size_t>(p)]);
  }

  r.get("ageing", "threshold_voltage_shift_v", c.threshold_voltage_shift_v);
  r.get("ageing", "mobility_factor", c.mobility_factor);
  r.reject_unknown();

  // Cross-field constraints.
  if (c.device_count < 1) errors.push_back("campaign.device_count: must be >= 1");
  if (c.temperatures_c.empty()) errors.push_back("campaign.temperatures_c: must not be empty");
  for (std::size_t i = 1; i < c.temperatures_c.size(); ++i) {
    if (!(c.temperatures_c[i] > c.temperatures_c[i - 1])) {
      errors.push_back("campaign.temperatures_c: must be strictly increasing");
      break;
    }
  }
  for (double t : c.temperatures_c) {
    if (t < kMinOperatingCelsius || t > kMaxOperatingCelsius) {
      errors.push_back("campaign.temperatures_c: " + config_detail::format_double(t) +
                       " outside [-40, 125]");
    }
  }
  if (c.payloads.empty()) errors.push_back("campaign.payloads: must not be empty");
  if (c.configs.empty()) errors.push_back("campaign.configs: must not be empty");
  if (std::set(c.payloads.begin(), c.payloads.end()).size() != c.payloads.size()) {
    errors.push_back("campaign.payloads: duplicate entries");
  }
  if (std::set(c.configs.begin(), c.configs.end()).size() != c.configs.size()) {
    errors.push_back("campaign.configs: duplicate entries");
  }
  if (!(c.sweep_low_fraction > 0 && c.sweep_low_fraction < c.sweep_high_fraction)) {
    errors.push_back(
        "campaign.sweep_low_fraction / campaign.sweep_high_fraction: need 0 < low < high");
  }
  if (!(c.sweep_step_hz > 0)) errors.push_back("campaign.sweep_step_hz: must be positive");
  if (!(c.search.f_min > 0)) errors.push_back("search.f_min_hz: must be positive");
  if (!(c.search.f_min < c.search.f_max)) {
    errors.push_back("search.f_min_hz must be below search.f_max_hz");
  }
  if (!(c.search.step > 0)) errors.push_back("search.step_hz: must be positive");
  if (c.search.runs_per_frequency < 1) errors.push_back("search.runs_per_frequency: must be >= 1");
  if (!(c.search.watchdog_timeout >= 0)) {
    errors.push_back("search.watchdog_timeout_s: must be non-negative");
  }
  if (!(c.transition_onset >= 1.0)) errors.push_back("transition.onset_fraction: must be >= 1");
  if (c.device.wait_states < 1) errors.push_back("device.wait_states: must be >= 1");
  if (!(c.timing.reference_frequency > 0)) {
    errors.push_back("timing.reference_frequency_hz: must be positive");
  }
  if (!(c.timing.buffered_scaling > 0)) errors.push_back("timing.buffered_scaling: must be positive");
  for (auto p : kAllPayloads) {
    if (!(c.timing.base(p) > 0)) {
      errors.push_back(std::string("timing.") + to_string(p) + "_s: must be positive");
    }
  }
  auto check_schedule = [&](const std::vector<double>& v, const char* key, auto valid) {
    if (!v.empty() && v.size() != 1 && v.size() != c.temperatures_c.size()) {
      errors.push_back(std::string("ageing.") + key +
                       ": needs one value or one per temperature");
    }
    for (double x : v) {
      if (!valid(x)) {
        errors.push_back(std::string("ageing.") + key + ": value " +
                         config_detail::format_double(x) + " out of range");
        break;
      }
    }
  };
  check_schedule(c.threshold_voltage_shift_v, "threshold_voltage_shift_v",
                 [](double x) { return x >= 0; });
  check_schedule(c.mobility_factor, "mobility_factor", [](double x) { return x > 0 && x <= 1; });

  // Physics and device description, including guard-band conservatism.
  if (errors.empty()) {
    try {
      c.physics.mobility_model().validate();
      c.physics.transistor.validate();
      const auto desc = c.device_description();
      const auto image = std::make_shared<const std::vector<std::uint8_t>>(
          std::vector<std::uint8_t>(desc.flash_bytes));
      (void)make_device(desc, "probe", 0, c.physics.mobility_model(), image);
      if (desc.test_region_bytes < 3 * kMatrixWords * sizeof(Word)) {
        errors.push_back("device.test_region_bytes: matrix payload needs at least " +
                         std::to_string(3 * kMatrixWords * sizeof(Word)) + " bytes");
      }
    } catch (const std::exception& e) {
      errors.push_back(std::string("physics/device: ") + e.what());
    }
  }
  return result;
}

/// Resolved configuration as INI text, every key present.
inline std::string to_ini(const CampaignConfig& c) {
  using config_detail::format_double;
  std::ostringstream o;
  auto list = [](const auto& items, auto fmt) {
    std::string s;
    for (const auto& x : items) s += (s.empty() ? "" : ", ") + fmt(x);
    return s;
  };
  auto dbl = [](double v) { return format_double(v); };
  o << "[campaign]\n"
    << "device_count = " << c.device_count << "\n"
    << "temperatures_c = " << list(c.temperatures_c, dbl) << "\n"
    << "payloads = " << list(c.payloads, [](PayloadName p) { return std::string(to_string(p)); })
    << "\n"
    << "configs = "
    << list(c.configs, [](FlashBuffering b) { return std::string(to_string(b)); }) << "\n"
    << "master_seed = " << c.master_seed << "\n"
    << "output_dir = " << c.output_dir << "\n"
    << "sweep = " << (c.sweep ? "true" : "false") << "\n"
    << "sweep_low_fraction = " << dbl(c.sweep_low_fraction) << "\n"
    << "sweep_high_fraction = " << dbl(c.sweep_high_fraction) << "\n"
    << "sweep_step_hz = " << dbl(c.sweep_step_hz) << "\n"
    << "threads = " << c.threads << "\n\n";
  o << "[search]\n"
    << "f_min_hz = " << dbl(c.search.f_min) << "\n"
    << "f_max_hz = " << dbl(c.search.f_max) << "\n"
    << "step_hz = " << dbl(c.search.step) << "\n"
    << "runs_per_frequency = " << c.search.runs_per_frequency << "\n"
    << "watchdog_timeout_s = " << dbl(c.search.watchdog_timeout) << "\n\n";
  o << "[physics]\n"
    << "mu_ph0 = " << dbl(c.physics.mu_ph0) << "\n"
    << "reference_temperature_k = " << dbl(c.physics.reference_temperature_k) << "\n"
    << "theta = " << dbl(c.physics.theta) << "\n"
    << "alpha = " << dbl(c.physics.alpha) << "\n"
    << "oxide_capacitance = " << dbl(c.physics.transistor.oxide_capacitance) << "\n"
    << "channel_width = " << dbl(c.physics.transistor.channel_width) << "\n"
    << "channel_length = " << dbl(c.physics.transistor.channel_length) << "\n"
    << "supply_voltage = " << dbl(c.physics.transistor.supply_voltage) << "\n"
    << "threshold_voltage = " << dbl(c.physics.transistor.threshold_voltage_fresh) << "\n"
    << "load_capacitance = " << dbl(c.physics.gate_load.load_capacitance) << "\n\n";
  o << "[device]\n"
    << "flash_chain = " << c.device.flash_chain << "\n"
    << "sram_chain = " << c.device.sram_chain << "\n"
    << "alu_chain = " << c.device.alu_chain << "\n"
    << "pipeline_chain = " << c.device.pipeline_chain << "\n"
    << "wait_states = " << c.device.wait_states << "\n"
    << "guard_band_hz = " << dbl(c.device.guard_band_hz) << "\n"
    << "sram_bytes = " << c.device.sram_bytes << "\n"
    << "flash_bytes = " << c.device.flash_bytes << "\n"
    << "test_region_bytes = " << c.device.test_region_bytes << "\n"
    << "flash_pattern_bytes = " << c.device.flash_pattern_bytes << "\n"
    << "variation_min = " << dbl(c.device.variation_min) << "\n"
    << "variation_max = " << dbl(c.device.variation_max) << "\n\n";
  o << "[transition]\n"
    << "onset_fraction = " << dbl(c.transition_onset) << "\n"
    << "shape = " << (c.transition_shape == TransitionShape::Linear ? "linear" : "smoothstep")
    << "\n\n";
  o << "[timing]\n"
    << "reference_frequency_hz = " << dbl(c.timing.reference_frequency) << "\n"
    << "buffered_scaling = " << dbl(c.timing.buffered_scaling) << "\n";
  for (auto p : kAllPayloads) o << to_string(p) << "_s = " << dbl(c.timing.base(p)) << "\n";
  o << "\n[ageing]\n"
    << "threshold_voltage_shift_v = " << list(c.threshold_voltage_shift_v, dbl) << "\n"
    << "mobility_factor = " << list(c.mobility_factor, dbl) << "\n";
  return o.str();
}

}  // namespace agemon

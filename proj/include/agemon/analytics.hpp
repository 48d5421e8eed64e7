#pragma once

// Degradation metrics over MEF temperature series, cross-device order
// statistics, and the qualitative payload score table.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "agemon/device.hpp"
#include "agemon/errors.hpp"
#include "agemon/payloads.hpp"

namespace agemon {

struct MefPoint {
  double temperature_c = 0.0;
  double mef_hz = 0.0;

  friend bool operator==(const MefPoint&, const MefPoint&) = default;
};

struct MefSeries {
  std::string device_id;
  PayloadName payload = PayloadName::Matrix;
  FlashBuffering config = FlashBuffering::Unbuffered;
  std::vector<MefPoint> points;

  void validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!(points[i].mef_hz > 0)) throw DomainError("MEF series values must be positive");
      if (i && !(points[i].temperature_c > points[i - 1].temperature_c)) {
        throw DomainError("MEF series temperatures must be strictly increasing");
      }
    }
  }

  friend bool operator==(const MefSeries&, const MefSeries&) = default;
};

/// Step i: MEF drop from T_{i-1} to T_i as a percentage of MEF at T_0.
inline double degradation_step(const MefSeries& series, std::size_t i) {
  if (i == 0) throw DomainError("degradation_step: index must be >= 1");
  if (i >= series.points.size()) throw DomainError("degradation_step: index beyond series");
  const auto& p = series.points;
  return (p[i - 1].mef_hz - p[i].mef_hz) / p[0].mef_hz * 100.0;
}

inline double total_degradation(const MefSeries& series) {
  if (series.points.size() < 2) throw DomainError("total_degradation: need at least two points");
  const auto& p = series.points;
  return (p.front().mef_hz - p.back().mef_hz) / p.front().mef_hz * 100.0;
}

struct OrderStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;

  friend bool operator==(const OrderStats&, const OrderStats&) = default;
};

/// Linear interpolation between order statistics (type 7).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline OrderStats cross_device_stats(std::vector<double> values) {
  if (values.empty()) throw DomainError("cross_device_stats: empty input");
  std::sort(values.begin(), values.end());
  return {quantile_sorted(values, 0.5), quantile_sorted(values, 0.25),
          quantile_sorted(values, 0.75)};
}

/// Per payload/config summary across devices.
struct DegradationReport {
  PayloadName payload = PayloadName::Matrix;
  FlashBuffering config = FlashBuffering::Unbuffered;
  std::vector<std::string> device_ids;
  std::vector<std::vector<double>> steps;  // [device][step]
  std::vector<double> totals;              // [device]
  std::vector<double> median_steps;        // [step]
  OrderStats total_stats;
  std::vector<std::string> anomalies;      // negative steps, kept unclamped

  friend bool operator==(const DegradationReport&, const DegradationReport&) = default;
};

inline DegradationReport summarize_degradation(std::span<const MefSeries> series) {
  if (series.empty()) throw DomainError("summarize_degradation: no series");
  DegradationReport r;
  r.payload = series.front().payload;
  r.config = series.front().config;
  const std::size_t n = series.front().points.size();
  for (const auto& s : series) {
    s.validate();
    if (s.points.size() != n) throw DomainError("summarize_degradation: ragged series");
    r.device_ids.push_back(s.device_id);
    std::vector<double> steps;
    for (std::size_t i = 1; i < n; ++i) {
      steps.push_back(degradation_step(s, i));
      if (steps.back() < 0) {
        r.anomalies.push_back(s.device_id + " step " + std::to_string(i) + " MEF increased");
      }
    }
    r.steps.push_back(std::move(steps));
    r.totals.push_back(total_degradation(s));
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::vector<double> column;
    for (const auto& d : r.steps) column.push_back(d[i]);
    r.median_steps.push_back(cross_device_stats(column).median);
  }
  r.total_stats = cross_device_stats(r.totals);
  return r;
}

// ---------------------------------------------------------------------------
// Payload comparison

/// Measured features of one payload; maps are keyed by configuration.
struct PayloadFeatures {
  std::map<FlashBuffering, double> mef_hz;
  std::map<FlashBuffering, double> exec_time_s;
  std::map<FlashBuffering, bool> has_transition;

  friend bool operator==(const PayloadFeatures&, const PayloadFeatures&) = default;
};

struct PayloadScore {
  double mef_score = 0.0;
  double execution_time_score = 0.0;
  double error_transition_score = 0.0;

  friend bool operator==(const PayloadScore&, const PayloadScore&) = default;
};

inline constexpr std::array<FlashBuffering, 2> kAllConfigs = {FlashBuffering::Buffered,
                                                             FlashBuffering::Unbuffered};

/// Values within this relative distance share a rank.
inline constexpr double kScoreTieTolerance = 0.01;

namespace detail {

/// Competition ranking (ascending, ties share the lower rank) mapped to stars:
/// rank 0 -> 3, each further rank half a star less, floored at 0.
inline std::map<PayloadName, double> rank_stars(const std::map<PayloadName, double>& values) {
  std::map<PayloadName, double> stars;
  for (const auto& [name, v] : values) {
    std::size_t better = 0;
    for (const auto& [other, w] : values) {
      if (w < v && (v - w) > kScoreTieTolerance * v) ++better;
    }
    stars[name] = std::max(0.0, 3.0 - 0.5 * static_cast<double>(better));
  }
  return stars;
}

inline double floor_half(double x) { return std::floor(x * 2.0 + 1e-9) / 2.0; }

}  // namespace detail

/// MEF: lowest MEF ranks best within each configuration; execution time:
/// fastest ranks best; each column is the half-star floor of the mean over
/// configurations. Error transition: 3 in both configurations, 1.5 in one, 0
/// in none.
inline std::map<PayloadName, PayloadScore> score_payloads(
    const std::map<PayloadName, PayloadFeatures>& features) {
  if (features.empty()) throw ReportError("score_payloads: no payload features");
  for (const auto& [name, f] : features) {
    for (auto c : kAllConfigs) {
      if (!f.mef_hz.contains(c) || !f.exec_time_s.contains(c) || !f.has_transition.contains(c)) {
        throw ReportError(std::string("score_payloads: missing ") + to_string(c) +
                          " features for " + to_string(name));
      }
    }
  }
  std::map<PayloadName, PayloadScore> table;
  for (auto c : kAllConfigs) {
    std::map<PayloadName, double> mef, time;
    for (const auto& [name, f] : features) {
      mef[name] = f.mef_hz.at(c);
      time[name] = f.exec_time_s.at(c);
    }
    for (const auto& [name, s] : detail::rank_stars(mef)) table[name].mef_score += s / 2.0;
    for (const auto& [name, s] : detail::rank_stars(time)) {
      table[name].execution_time_score += s / 2.0;
    }
  }
  for (auto& [name, score] : table) {
    score.mef_score = detail::floor_half(score.mef_score);
    score.execution_time_score = detail::floor_half(score.execution_time_score);
    const auto& t = features.at(name).has_transition;
    const int configs_with_transition =
        int(t.at(FlashBuffering::Buffered)) + int(t.at(FlashBuffering::Unbuffered));
    score.error_transition_score = 1.5 * configs_with_transition;
  }
  return table;
}

}  // namespace agemon

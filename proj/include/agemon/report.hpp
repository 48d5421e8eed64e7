#pragma once

// Campaign report model and its file formats:
//   summary.json        per-device MEF series, degradation, features, scores
//   profiles.csv        sweep profiles, one row per grid point
//   scores.csv          payload score table
//   trace.jsonl         one record per probed frequency of each MEF search
//   resolved_config.ini the configuration the campaign actually ran
//   flash_image.bin     the known flash content the payloads verified against

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "agemon/analytics.hpp"
#include "agemon/campaign.hpp"
#include "agemon/campaign_config.hpp"
#include "agemon/errors.hpp"

namespace agemon {

inline constexpr int kReportSchemaVersion = 1;

inline constexpr const char* kProfileCsvHeader =
    "frequency_hz,temperature_c,device_id,payload,config,error_fraction,hang_fraction";
inline constexpr const char* kScoreCsvHeader =
    "payload,mef_stars,execution_time_stars,error_transition_stars";

struct SeriesRecord {
  MefSeries series;
  std::vector<std::optional<double>> mof_hz;  // per temperature

  friend bool operator==(const SeriesRecord&, const SeriesRecord&) = default;
};

struct CampaignReport {
  int schema_version = kReportSchemaVersion;
  std::uint64_t master_seed = 0;
  unsigned device_count = 0;
  std::vector<double> temperatures_c;
  unsigned runs_per_frequency = 0;
  std::vector<SeriesRecord> series;
  std::vector<DegradationReport> degradation;
  std::map<PayloadName, PayloadFeatures> features;
  std::map<PayloadName, PayloadScore> scores;  // empty unless both configs ran
  double virtual_duration_s = 0.0;
  std::uint64_t total_test_executions = 0;

  friend bool operator==(const CampaignReport&, const CampaignReport&) = default;
};

// ---------------------------------------------------------------------------
// Building

/// Features used for the score table: median MEF across devices at the first
/// temperature, execution time at the guard-band clock, and whether any
/// compute error (as opposed to a hang) was observed in that configuration.
inline std::map<PayloadName, PayloadFeatures> measure_features(const CampaignResults& results) {
  const auto& cfg = results.config;
  std::map<PayloadName, PayloadFeatures> features;
  for (PayloadName name : cfg.payloads) {
    const Payload payload = make_payload(name, cfg.timing);
    for (FlashBuffering b : cfg.configs) {
      std::vector<double> mefs;
      bool transition = false;
      for (const auto& cell : results.cells) {
        if (cell.payload != name || cell.config != b) continue;
        if (cell.temperature_index == 0) mefs.push_back(cell.search.mef);
        for (const auto* trace : {&cell.search.trace, &cell.profile}) {
          for (const auto& r : *trace) transition |= r.compute_errors > 0;
        }
      }
      auto& f = features[name];
      f.mef_hz[b] = cross_device_stats(mefs).median;
      f.exec_time_s[b] = execution_time(payload, cfg.device.guard_band_hz, cfg.device_config(b),
                                        cfg.timing);
      f.has_transition[b] = transition;
    }
  }
  return features;
}

inline CampaignReport build_report(const CampaignResults& results) {
  if (results.cells.empty()) throw ReportError("campaign produced no results");
  const auto& cfg = results.config;
  CampaignReport report;
  report.master_seed = cfg.master_seed;
  report.device_count = cfg.device_count;
  report.temperatures_c = cfg.temperatures_c;
  report.runs_per_frequency = cfg.search.runs_per_frequency;

  // Cells are sorted by device, temperature, payload, config.
  std::map<std::tuple<std::size_t, PayloadName, FlashBuffering>, SeriesRecord> by_key;
  for (const auto& cell : results.cells) {
    auto& rec = by_key[{cell.device_index, cell.payload, cell.config}];
    rec.series.device_id = cell.device_id;
    rec.series.payload = cell.payload;
    rec.series.config = cell.config;
    rec.series.points.push_back({cell.temperature_c, cell.search.mef});
    rec.mof_hz.push_back(cell.search.mof);
    report.total_test_executions += cell.executions;
  }
  for (auto& [key, rec] : by_key) report.series.push_back(std::move(rec));

  if (cfg.temperatures_c.size() >= 2) {
    for (PayloadName name : kAllPayloads) {
      for (FlashBuffering b : kAllConfigs) {
        std::vector<MefSeries> group;
        for (const auto& rec : report.series) {
          if (rec.series.payload == name && rec.series.config == b) group.push_back(rec.series);
        }
        if (!group.empty()) report.degradation.push_back(summarize_degradation(group));
      }
    }
  }
  report.features = measure_features(results);
  if (cfg.configs.size() == kAllConfigs.size()) report.scores = score_payloads(report.features);
  report.virtual_duration_s = results.virtual_duration_s();
  return report;
}

// ---------------------------------------------------------------------------
// JSON

namespace report_detail {

using nlohmann::json;

inline FlashBuffering parse_config(const std::string& s) {
  if (s == "buffered") return FlashBuffering::Buffered;
  if (s == "unbuffered") return FlashBuffering::Unbuffered;
  throw ReportError("unknown configuration '" + s + "'");
}

inline PayloadName parse_payload_or_throw(const std::string& s) {
  const auto p = parse_payload(s);
  if (!p) throw ReportError("unknown payload '" + s + "'");
  return *p;
}

inline json stats_json(const OrderStats& s) {
  return {{"median", s.median}, {"q1", s.q1}, {"q3", s.q3}};
}

inline OrderStats stats_from(const json& j) {
  return {j.at("median").get<double>(), j.at("q1").get<double>(), j.at("q3").get<double>()};
}

}  // namespace report_detail

inline nlohmann::json to_json(const CampaignReport& r) {
  using nlohmann::json;
  using namespace report_detail;
  json j;
  j["schema_version"] = r.schema_version;
  j["master_seed"] = r.master_seed;
  j["device_count"] = r.device_count;
  j["temperatures_c"] = r.temperatures_c;
  j["runs_per_frequency"] = r.runs_per_frequency;

  json series = json::array();
  for (const auto& rec : r.series) {
    json points = json::array();
    for (std::size_t i = 0; i < rec.series.points.size(); ++i) {
      const auto& p = rec.series.points[i];
      json mof = rec.mof_hz[i] ? json(*rec.mof_hz[i]) : json(nullptr);
      points.push_back({{"temperature_c", p.temperature_c}, {"mef_hz", p.mef_hz}, {"mof_hz", mof}});
    }
    series.push_back({{"device_id", rec.series.device_id},
                      {"payload", to_string(rec.series.payload)},
                      {"config", to_string(rec.series.config)},
                      {"points", points}});
  }
  j["series"] = series;

  json degradation = json::array();
  for (const auto& d : r.degradation) {
    degradation.push_back({{"payload", to_string(d.payload)},
                           {"config", to_string(d.config)},
                           {"device_ids", d.device_ids},
                           {"steps_percent", d.steps},
                           {"totals_percent", d.totals},
                           {"median_steps_percent", d.median_steps},
                           {"total_percent", stats_json(d.total_stats)},
                           {"anomalies", d.anomalies}});
  }
  j["degradation"] = degradation;

  json features = json::object();
  for (const auto& [name, f] : r.features) {
    json per_config = json::object();
    for (const auto& [b, mef] : f.mef_hz) {
      per_config[to_string(b)] = {{"mef_hz", mef},
                                  {"exec_time_s", f.exec_time_s.at(b)},
                                  {"has_transition", f.has_transition.at(b)}};
    }
    features[to_string(name)] = per_config;
  }
  j["features"] = features;

  json scores = json::object();
  for (const auto& [name, s] : r.scores) {
    scores[to_string(name)] = {{"mef", s.mef_score},
                               {"execution_time", s.execution_time_score},
                               {"error_transition", s.error_transition_score}};
  }
  j["scores"] = scores;
  j["virtual_duration_s"] = r.virtual_duration_s;
  j["total_test_executions"] = r.total_test_executions;
  return j;
}

inline CampaignReport report_from_json(const nlohmann::json& j) {
  using namespace report_detail;
  CampaignReport r;
  try {
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion) {
      throw ReportError("unsupported report schema_version " + std::to_string(r.schema_version));
    }
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    r.device_count = j.at("device_count").get<unsigned>();
    r.temperatures_c = j.at("temperatures_c").get<std::vector<double>>();
    r.runs_per_frequency = j.at("runs_per_frequency").get<unsigned>();
    for (const auto& s : j.at("series")) {
      SeriesRecord rec;
      rec.series.device_id = s.at("device_id").get<std::string>();
      rec.series.payload = parse_payload_or_throw(s.at("payload").get<std::string>());
      rec.series.config = parse_config(s.at("config").get<std::string>());
      for (const auto& p : s.at("points")) {
        rec.series.points.push_back({p.at("temperature_c").get<double>(), p.at("mef_hz").get<double>()});
        const auto& mof = p.at("mof_hz");
        rec.mof_hz.push_back(mof.is_null() ? std::nullopt : std::optional(mof.get<double>()));
      }
      r.series.push_back(std::move(rec));
    }
    for (const auto& d : j.at("degradation")) {
      DegradationReport rep;
      rep.payload = parse_payload_or_throw(d.at("payload").get<std::string>());
      rep.config = parse_config(d.at("config").get<std::string>());
      rep.device_ids = d.at("device_ids").get<std::vector<std::string>>();
      rep.steps = d.at("steps_percent").get<std::vector<std::vector<double>>>();
      rep.totals = d.at("totals_percent").get<std::vector<double>>();
      rep.median_steps = d.at("median_steps_percent").get<std::vector<double>>();
      rep.total_stats = stats_from(d.at("total_percent"));
      rep.anomalies = d.at("anomalies").get<std::vector<std::string>>();
      r.degradation.push_back(std::move(rep));
    }
    for (const auto& [name, per_config] : j.at("features").items()) {
      PayloadFeatures f;
      for (const auto& [b, v] : per_config.items()) {
        const auto cfg = parse_config(b);
        f.mef_hz[cfg] = v.at("mef_hz").get<double>();
        f.exec_time_s[cfg] = v.at("exec_time_s").get<double>();
        f.has_transition[cfg] = v.at("has_transition").get<bool>();
      }
      r.features[parse_payload_or_throw(name)] = std::move(f);
    }
    for (const auto& [name, s] : j.at("scores").items()) {
      r.scores[parse_payload_or_throw(name)] = {s.at("mef").get<double>(),
                                                s.at("execution_time").get<double>(),
                                                s.at("error_transition").get<double>()};
    }
    r.virtual_duration_s = j.at("virtual_duration_s").get<double>();
    r.total_test_executions = j.at("total_test_executions").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ReportError(std::string("malformed report: ") + e.what());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Text formats

inline std::string format_number(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string profile_csv(const CampaignResults& results) {
  std::string out = std::string(kProfileCsvHeader) + "\n";
  for (const auto& cell : results.cells) {
    for (const auto& r : cell.profile) {
      out += format_number(r.frequency) + "," + format_number(cell.temperature_c) + "," +
             cell.device_id + "," + to_string(cell.payload) + "," + to_string(cell.config) + "," +
             format_number(r.error_fraction()) + "," + format_number(r.hang_fraction()) + "\n";
    }
  }
  return out;
}

inline std::string score_csv(const std::map<PayloadName, PayloadScore>& scores) {
  std::string out = std::string(kScoreCsvHeader) + "\n";
  for (const auto& [name, s] : scores) {
    out += std::string(to_string(name)) + "," + format_number(s.mef_score) + "," +
           format_number(s.execution_time_score) + "," + format_number(s.error_transition_score) +
           "\n";
  }
  return out;
}

inline std::string trace_jsonl(const CampaignResults& results) {
  std::string out;
  for (const auto& cell : results.cells) {
    for (const auto& r : cell.search.trace) {
      const nlohmann::json line = {{"device_id", cell.device_id},
                                   {"payload", to_string(cell.payload)},
                                   {"config", to_string(cell.config)},
                                   {"temperature", cell.temperature_c},
                                   {"frequency_hz", r.frequency},
                                   {"passes", r.passes},
                                   {"compute_errors", r.compute_errors},
                                   {"hangs", r.hangs},
                                   {"virtual_time_s", r.virtual_time_s}};
      out += line.dump() + "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Export

inline constexpr const char* kSummaryFile = "summary.json";
inline constexpr const char* kProfilesFile = "profiles.csv";
inline constexpr const char* kScoresFile = "scores.csv";
inline constexpr const char* kTraceFile = "trace.jsonl";
inline constexpr const char* kResolvedConfigFile = "resolved_config.ini";
inline constexpr const char* kFlashImageFile = "flash_image.bin";

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ReportError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw ReportError("failed writing " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ReportError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes every report file into `directory`. The report is built before any
/// file is touched, so a failing campaign leaves nothing behind.
inline CampaignReport export_report(const CampaignResults& results,
                                    const std::filesystem::path& directory) {
  const CampaignReport report = build_report(results);
  const std::string summary = to_json(report).dump(2) + "\n";
  const std::string profiles = profile_csv(results);
  const std::string scores = score_csv(report.scores);
  const std::string trace = trace_jsonl(results);
  const std::string resolved = to_ini(results.config);

  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw ReportError("cannot create " + directory.string() + ": " + ec.message());
  write_file(directory / kSummaryFile, summary);
  write_file(directory / kProfilesFile, profiles);
  write_file(directory / kScoresFile, scores);
  write_file(directory / kTraceFile, trace);
  write_file(directory / kResolvedConfigFile, resolved);
  const auto& image = *results.flash_image;
  write_file(directory / kFlashImageFile,
             std::string_view(reinterpret_cast<const char*>(image.data()), image.size()));
  return report;
}

}  // namespace agemon

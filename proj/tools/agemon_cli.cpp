// agemon: campaign runner for the timing-window ageing monitor simulator.
//
//   agemon run <config> [--ci] [--threads N]
//   agemon validate <config>
//   agemon score <summary.json>
//   agemon sweep <config> --device N --payload P [--flash buffered|unbuffered]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "agemon/agemon.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr unsigned kCiRunsPerFrequency = 50;

struct ConfigFailure {
  std::vector<std::string> errors;
};

agemon::CampaignConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = agemon::read_file(path);
  } catch (const agemon::ReportError& e) {
    throw ConfigFailure{{e.what()}};
  }
  auto result = agemon::validate_config(text);
  if (!result.ok()) throw ConfigFailure{result.errors};
  return result.config;
}

void log(const std::string& line) { std::fprintf(stderr, "[agemon] %s\n", line.c_str()); }

int cmd_run(const std::string& path, bool ci, unsigned threads) {
  agemon::CampaignConfig config = load_config(path);
  if (ci) config.search.runs_per_frequency = kCiRunsPerFrequency;
  if (threads) config.threads = threads;
  if (const char* env = std::getenv(agemon::kOutputDirEnv); env && *env) config.output_dir = env;
  log("running " + std::to_string(config.device_count) + " devices x " +
      std::to_string(config.temperatures_c.size()) + " temperatures x " +
      std::to_string(config.payloads.size()) + " payloads x " +
      std::to_string(config.configs.size()) + " configurations, " +
      std::to_string(config.search.runs_per_frequency) + " runs per frequency");
  const auto results = agemon::run_campaign(config);
  const auto report = agemon::export_report(results, config.output_dir);
  for (const auto& d : report.degradation) {
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %-10s median total degradation %6.2f%%",
                  agemon::to_string(d.payload), agemon::to_string(d.config),
                  d.total_stats.median);
    log(line);
  }
  log("virtual test time " + agemon::format_number(report.virtual_duration_s) + " s, " +
      std::to_string(report.total_test_executions) + " payload executions");
  log("reports written to " + config.output_dir);
  return 0;
}

int cmd_validate(const std::string& path) {
  const auto config = load_config(path);
  std::cout << agemon::to_ini(config);
  return 0;
}

std::string stars(double s) {
  std::string out;
  for (int i = 0; i < 3; ++i) {
    const double left = s - i;
    out += left >= 1.0 ? "*" : (left >= 0.5 ? "+" : ".");
  }
  return out;
}

int cmd_score(const std::string& path) {
  const auto report = agemon::report_from_json(nlohmann::json::parse(agemon::read_file(path)));
  const auto table = agemon::score_payloads(report.features);
  std::printf("%-12s %-5s %-14s %-16s\n", "payload", "MEF", "execution time", "error transition");
  for (const auto& [name, s] : table) {
    std::printf("%-12s %-5s %-14s %-16s\n", agemon::to_string(name), stars(s.mef_score).c_str(),
                stars(s.execution_time_score).c_str(), stars(s.error_transition_score).c_str());
  }
  std::cout << "\n" << agemon::score_csv(table);
  if (!report.scores.empty() && report.scores != table) {
    log("warning: recomputed scores differ from those stored in the report");
  }
  return 0;
}

int cmd_sweep(const std::string& path, unsigned device, const std::string& payload_name,
              const std::string& only_config) {
  auto config = load_config(path);
  const auto payload = agemon::parse_payload(payload_name);
  if (!payload) throw ConfigFailure{{"--payload: unknown payload '" + payload_name + "'"}};
  if (device < 1 || device > config.device_count) {
    throw ConfigFailure{{"--device: must be in [1, " + std::to_string(config.device_count) + "]"}};
  }
  if (!only_config.empty()) {
    if (only_config == "buffered") config.configs = {agemon::FlashBuffering::Buffered};
    else if (only_config == "unbuffered") config.configs = {agemon::FlashBuffering::Unbuffered};
    else throw ConfigFailure{{"--flash: expected buffered or unbuffered"}};
  }
  config.sweep = true;
  agemon::CampaignResults results;
  results.config = config;
  results.flash_image = agemon::campaign_flash_image(config);
  results.cells = agemon::simulate_device(config, device - 1, results.flash_image, *payload);
  for (const auto& cell : results.cells) {
    char line[160];
    std::snprintf(line, sizeof line, "%s %s %s %.0f C: MEF %.3f MHz, oracle %.3f MHz",
                  cell.device_id.c_str(), agemon::to_string(cell.payload),
                  agemon::to_string(cell.config), cell.temperature_c, cell.search.mef / 1e6,
                  cell.oracle_mef_hz / 1e6);
    log(line);
  }
  std::cout << agemon::profile_csv(results);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Timing-window ageing monitor: simulated self-test campaigns"};
  app.require_subcommand(1);

  std::string config_path, report_path, payload, only_config;
  bool ci = false;
  unsigned threads = 0, device = 0;

  auto* run = app.add_subcommand("run", "Run a full campaign and write reports");
  run->add_option("config", config_path, "Campaign configuration file")->required();
  run->add_flag("--ci", ci, "CI mode: 50 runs per frequency");
  run->add_option("--threads", threads, "Worker threads (devices in parallel)");

  auto* validate = app.add_subcommand("validate", "Validate a configuration and print it resolved");
  validate->add_option("config", config_path, "Campaign configuration file")->required();

  auto* score = app.add_subcommand("score", "Recompute the payload score table from a report");
  score->add_option("report", report_path, "summary.json written by `run`")->required();

  auto* sweep = app.add_subcommand("sweep", "Profile one device and payload, CSV to stdout");
  sweep->add_option("campaign", config_path, "Campaign configuration file")->required();
  sweep->add_option("--device", device, "Device number, 1-based")->required();
  sweep->add_option("--payload", payload, "Payload name")->required();
  sweep->add_option("--flash", only_config, "Restrict to one flash configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, ci, threads);
    if (*validate) return cmd_validate(config_path);
    if (*score) return cmd_score(report_path);
    if (*sweep) return cmd_sweep(config_path, device, payload, only_config);
  } catch (const ConfigFailure& f) {
    for (const auto& e : f.errors) std::fprintf(stderr, "config error: %s\n", e.c_str());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}

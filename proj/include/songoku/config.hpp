#pragma once

// Flat "key:type = value" configuration. One key per line, '#' starts a
// comment, the type annotation is optional on input and always emitted.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "songoku/scheduler.hpp"

namespace songoku {

struct AppConfig {
  std::string experiment = "run";
  std::string out = ".";

  // planted problem
  std::size_t tasks = 8;
  std::size_t dim = 32;
  std::size_t groups = 2;
  double gamma = 0.3;
  double sigma = 1.0;
  double m0 = 1.0;

  SchedulerConfig scheduler = default_scheduler();

  // experiments
  std::size_t trials = 500;
  double delta = 0.1;
  double recovery_constant = 0.0;  // 0: the frozen calibrated value
  std::size_t seeds = 20;

  // bench
  std::vector<std::size_t> bench_tasks{3, 6, 16, 40};
  std::vector<std::size_t> bench_periods{4, 32, 256};
  std::size_t bench_dim = 1024;
  std::size_t bench_steps = 900;
  std::size_t repeats = 10;

  static SchedulerConfig default_scheduler();

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

struct ConfigField {
  std::string key;
  std::string type;  // int, real, bool, str, list
  std::string help;
  std::function<void(AppConfig&, const std::string&)> set;
  std::function<std::string(const AppConfig&)> get;
};

const std::vector<ConfigField>& config_fields();

/// Parse text into `base` (defaults unless overridden). Unknown keys, type
/// mismatches and malformed values throw ConfigError.
AppConfig parse_config_text(const std::string& text, AppConfig base = {});
AppConfig parse_config_file(const std::string& path, AppConfig base = {});

/// Assign a single key from a string value (used for command-line flags).
void set_config_value(AppConfig& cfg, const std::string& key, const std::string& value);

/// Every key with its type, in registry order. Parsing the output yields an
/// identical configuration.
std::string emit_config(const AppConfig& cfg);
std::string config_json(const AppConfig& cfg);

/// Defaults table for --help.
std::string config_help();

bool operator==(const AppConfig& a, const AppConfig& b);

}  // namespace songoku

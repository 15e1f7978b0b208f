#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "songoku/config.hpp"
#include "songoku/experiments.hpp"
#include "songoku/scheduler.hpp"

namespace {

int fail(const std::string& kind, const std::string& message, const std::string& field = {}) {
  nlohmann::json err{{"error", kind}, {"message", message}};
  if (!field.empty()) err["field"] = field;
  std::cout << err.dump() << std::endl;
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conflict-aware multi-task gradient scheduler: experiments and benchmark"};
  app.footer("Config keys (key:type = default):\n" + songoku::config_help());

  std::string config_path;
  app.add_option("--config", config_path, "flat key:type = value config file");

  // flag -> config key; applied after the file so flags win
  const std::vector<std::pair<std::string, std::string>> flags{
      {"experiment", "experiment"}, {"out", "out"},       {"seed", "seed"},
      {"K", "K"},                   {"d", "d"},           {"R", "R"},
      {"tau-star", "tau_star"},     {"beta", "beta"},     {"f-min", "f_min"},
      {"steps", "T"},               {"repeats", "repeats"}, {"sketch-mode", "sketch_mode"}};
  std::vector<std::optional<std::string>> values(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i)
    app.add_option("--" + flags[i].first, values[i], "sets " + flags[i].second);
  bool dump = false;
  app.add_flag("--print-config", dump, "print the effective config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    songoku::AppConfig cfg;
    if (!config_path.empty()) cfg = songoku::parse_config_file(config_path);
    for (std::size_t i = 0; i < flags.size(); ++i)
      if (values[i]) songoku::set_config_value(cfg, flags[i].second, *values[i]);
    cfg.validate();
    if (dump) {
      std::cout << songoku::emit_config(cfg);
      return 0;
    }
    std::cout << songoku::run_experiment(cfg);
    return 0;
  } catch (const songoku::ConfigError& e) {
    return fail("config", e.what(), e.field());
  } catch (const songoku::UnknownExperiment& e) {
    nlohmann::json err{{"error", "unknown_experiment"}, {"message", e.what()},
                       {"available", songoku::experiment_names()}};
    std::cout << err.dump() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    return fail("runtime", e.what());
  }
}

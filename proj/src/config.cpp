#include "songoku/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace songoku {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || v.empty())
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(out))
    throw ConfigError(key, "expected a finite real number, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_uint(key, trim(item)));
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list of integers");
  return out;
}

std::string real_str(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string list_str(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

template <typename Member>
ConfigField uint_field(std::string key, std::string help, Member member) {
  return {key, "int", std::move(help),
          [member, key](AppConfig& c, const std::string& v) {
            member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(parse_uint(key, v));
          },
          [member](const AppConfig& c) {
            return std::to_string(member(c));
          }};
}

template <typename Member>
ConfigField real_field(std::string key, std::string help, Member member) {
  return {key, "real", std::move(help),
          [member, key](AppConfig& c, const std::string& v) { member(c) = parse_real(key, v); },
          [member](const AppConfig& c) { return real_str(member(c)); }};
}

template <typename Member>
ConfigField bool_field(std::string key, std::string help, Member member) {
  return {key, "bool", std::move(help),
          [member, key](AppConfig& c, const std::string& v) { member(c) = parse_bool(key, v); },
          [member](const AppConfig& c) {
            return std::string(member(c) ? "true" : "false");
          }};
}

template <typename Member>
ConfigField list_field(std::string key, std::string help, Member member) {
  return {key, "list", std::move(help),
          [member, key](AppConfig& c, const std::string& v) { member(c) = parse_list(key, v); },
          [member](const AppConfig& c) { return list_str(member(c)); }};
}

StepRule parse_step_rule(const std::string& v) {
  if (v == "constant") return StepRule::kConstant;
  if (v == "inverse_sqrt_t") return StepRule::kInverseSqrtT;
  throw ConfigError("eta_rule", "expected constant or inverse_sqrt_t, got '" + v + "'");
}

ClassSelection parse_selection(const std::string& v) {
  if (v == "cyclic") return ClassSelection::kCyclic;
  if (v == "random_scaled") return ClassSelection::kRandomScaled;
  throw ConfigError("selection", "expected cyclic or random_scaled, got '" + v + "'");
}

std::vector<ConfigField> build_fields() {
  std::vector<ConfigField> f;
  f.push_back({"experiment", "str", "driver to run",
               [](AppConfig& c, const std::string& v) { c.experiment = v; },
               [](const AppConfig& c) { return c.experiment; }});
  f.push_back({"out", "str", "output directory",
               [](AppConfig& c, const std::string& v) { c.out = v; },
               [](const AppConfig& c) { return c.out; }});
  f.push_back(uint_field("K", "number of tasks", [](auto& c) -> auto& { return c.tasks; }));
  f.push_back(uint_field("d", "gradient dimension", [](auto& c) -> auto& { return c.dim; }));
  f.push_back(uint_field("groups", "planted groups", [](auto& c) -> auto& { return c.groups; }));
  f.push_back(real_field("gamma", "planted separation margin", [](auto& c) -> auto& { return c.gamma; }));
  f.push_back(real_field("sigma", "gradient noise scale", [](auto& c) -> auto& { return c.sigma; }));
  f.push_back(real_field("m0", "mean gradient norm", [](auto& c) -> auto& { return c.m0; }));
  f.push_back(real_field("tau_star", "target threshold, (0, 1]",
                         [](auto& c) -> auto& { return c.scheduler.tau_star; }));
  f.push_back(uint_field("T_warm", "warm-up steps at tau = 1",
                         [](auto& c) -> auto& { return c.scheduler.warmup; }));
  f.push_back(real_field("anneal_curvature", "curvature a of the log anneal",
                         [](auto& c) -> auto& { return c.scheduler.anneal.curvature; }));
  f.push_back(uint_field("anneal_horizon", "anneal length in steps (0: 4R)",
                         [](auto& c) -> auto& { return c.scheduler.anneal.horizon; }));
  f.push_back(uint_field("R", "refresh period",
                         [](auto& c) -> auto& { return c.scheduler.refresh_period; }));
  f.push_back(real_field("beta", "EMA coefficient, [0, 1)",
                         [](auto& c) -> auto& { return c.scheduler.beta; }));
  f.push_back(real_field("norm_floor", "EMA norm below which a task is excluded",
                         [](auto& c) -> auto& { return c.scheduler.norm_floor; }));
  f.push_back(uint_field("f_min", "minimum appearances per period",
                         [](auto& c) -> auto& { return c.scheduler.f_min; }));
  f.push_back(real_field("eta", "step size, or c in c/sqrt(T)",
                         [](auto& c) -> auto& { return c.scheduler.step_size; }));
  f.push_back({"eta_rule", "str", "constant | inverse_sqrt_t",
               [](AppConfig& c, const std::string& v) { c.scheduler.step_rule = parse_step_rule(v); },
               [](const AppConfig& c) { return to_string(c.scheduler.step_rule); }});
  f.push_back(uint_field("T", "total steps",
                         [](auto& c) -> auto& { return c.scheduler.total_steps; }));
  f.push_back({"seed", "int", "run seed",
               [](AppConfig& c, const std::string& v) {
                 c.scheduler.seed = parse_uint("seed", v);
                 c.scheduler.sketch.seed = c.scheduler.seed;
               },
               [](const AppConfig& c) { return std::to_string(c.scheduler.seed); }});
  f.push_back(bool_field("permute_classes", "shuffle class order at each refresh",
                         [](auto& c) -> auto& { return c.scheduler.permute_classes; }));
  f.push_back({"selection", "str", "cyclic | random_scaled",
               [](AppConfig& c, const std::string& v) { c.scheduler.selection = parse_selection(v); },
               [](const AppConfig& c) { return to_string(c.scheduler.selection); }});
  f.push_back(bool_field("freeze_first_coloring", "keep the first annealed coloring",
                         [](auto& c) -> auto& { return c.scheduler.freeze_first_coloring; }));
  f.push_back({"sketch_mode", "str", "dense | jl | fd | edge_sample | incremental",
               [](AppConfig& c, const std::string& v) {
                 try {
                   c.scheduler.sketch.mode = parse_sketch_mode(v);
                 } catch (const std::invalid_argument& e) {
                   throw ConfigError("sketch_mode", e.what());
                 }
               },
               [](const AppConfig& c) { return to_string(c.scheduler.sketch.mode); }});
  f.push_back(uint_field("jl_dim", "JL target dimension (0: derived)",
                         [](auto& c) -> auto& { return c.scheduler.sketch.jl_dim; }));
  f.push_back(uint_field("fd_rows", "Frequent Directions rows",
                         [](auto& c) -> auto& { return c.scheduler.sketch.fd_rows; }));
  f.push_back(real_field("epsilon", "sketch accuracy target",
                         [](auto& c) -> auto& { return c.scheduler.sketch.epsilon; }));
  f.push_back(real_field("margin", "edge-sampling refinement band",
                         [](auto& c) -> auto& { return c.scheduler.sketch.margin; }));
  f.push_back(uint_field("pair_budget", "edge-sampling pair budget (0: all pairs)",
                         [](auto& c) -> auto& { return c.scheduler.sketch.pair_budget; }));
  f.push_back(real_field("change_threshold", "relative row drift for incremental Gram",
                         [](auto& c) -> auto& { return c.scheduler.sketch.change_threshold; }));
  f.push_back(uint_field("rebuild_every", "forced full Gram rebuild period",
                         [](auto& c) -> auto& { return c.scheduler.sketch.rebuild_every; }));
  f.push_back({"combinator", "str", "none | project | adaptive_scale | project_and_scale",
               [](AppConfig& c, const std::string& v) {
                 try {
                   c.scheduler.combinator.mode = parse_combinator_mode(v);
                 } catch (const std::invalid_argument& e) {
                   throw ConfigError("combinator", e.what());
                 }
               },
               [](const AppConfig& c) { return to_string(c.scheduler.combinator.mode); }});
  f.push_back(real_field("scale_ema_beta", "norm EMA of the adaptive scaler",
                         [](auto& c) -> auto& { return c.scheduler.combinator.scale_ema_beta; }));
  f.push_back(real_field("scale_floor", "adaptive scaler floor",
                         [](auto& c) -> auto& { return c.scheduler.combinator.scale_floor; }));
  f.push_back(uint_field("trials", "Monte Carlo trials", [](auto& c) -> auto& { return c.trials; }));
  f.push_back(real_field("delta", "recovery failure probability", [](auto& c) -> auto& { return c.delta; }));
  f.push_back(real_field("recovery_constant", "sample-complexity constant (0: calibrated)",
                         [](auto& c) -> auto& { return c.recovery_constant; }));
  f.push_back(uint_field("seeds", "seeds per convergence horizon",
                         [](auto& c) -> auto& { return c.seeds; }));
  f.push_back(list_field("bench_K", "bench task counts",
                         [](auto& c) -> auto& { return c.bench_tasks; }));
  f.push_back(list_field("bench_R", "bench refresh periods",
                         [](auto& c) -> auto& { return c.bench_periods; }));
  f.push_back(uint_field("bench_d", "bench gradient dimension",
                         [](auto& c) -> auto& { return c.bench_dim; }));
  f.push_back(uint_field("bench_steps", "bench steps per run",
                         [](auto& c) -> auto& { return c.bench_steps; }));
  f.push_back(uint_field("repeats", "bench repeats", [](auto& c) -> auto& { return c.repeats; }));
  return f;
}

const ConfigField& find_field(const std::string& key) {
  for (const auto& f : config_fields())
    if (f.key == key) return f;
  throw ConfigError(key, "unknown key");
}

}  // namespace

SchedulerConfig AppConfig::default_scheduler() {
  SchedulerConfig s;
  s.tau_star = 0.5;
  s.refresh_period = 32;
  s.beta = 0.9;
  s.total_steps = 1024;
  s.step_size = 0.01;
  return s;
}

void AppConfig::validate() const {
  scheduler.validate();
  if (tasks < 2) throw ConfigError("K", "must be >= 2");
  if (dim < 1) throw ConfigError("d", "must be >= 1");
  if (groups < 2 || groups > tasks) throw ConfigError("groups", "must lie in [2, K]");
  if (!(gamma > 0.0)) throw ConfigError("gamma", "must be positive");
  if (!(sigma >= 0.0)) throw ConfigError("sigma", "must be >= 0");
  if (!(m0 > 0.0)) throw ConfigError("m0", "must be positive");
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta", "must lie in (0, 1)");
  if (!(recovery_constant >= 0.0)) throw ConfigError("recovery_constant", "must be >= 0");
  if (seeds < 1) throw ConfigError("seeds", "must be >= 1");
  if (repeats < 1) throw ConfigError("repeats", "must be >= 1");
  if (bench_steps < 1) throw ConfigError("bench_steps", "must be >= 1");
  if (bench_dim < 1) throw ConfigError("bench_d", "must be >= 1");
  for (std::size_t k : bench_tasks)
    if (k < 2) throw ConfigError("bench_K", "every entry must be >= 2");
  for (std::size_t r : bench_periods)
    if (r < 1) throw ConfigError("bench_R", "every entry must be >= 1");
}

const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = build_fields();
  return fields;
}

void set_config_value(AppConfig& cfg, const std::string& key, const std::string& value) {
  find_field(key).set(cfg, value);
}

AppConfig parse_config_text(const std::string& text, AppConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected 'key[:type] = value'");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::string type;
    if (const auto colon = key.find(':'); colon != std::string::npos) {
      type = trim(key.substr(colon + 1));
      key = trim(key.substr(0, colon));
    }
    const ConfigField& field = find_field(key);
    if (!type.empty() && type != field.type)
      throw ConfigError(key, "declared type '" + type + "' but the key is " + field.type);
    field.set(base, value);
  }
  base.validate();
  return base;
}

AppConfig parse_config_file(const std::string& path, AppConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), std::move(base));
}

std::string emit_config(const AppConfig& cfg) {
  std::string out;
  for (const auto& f : config_fields()) out += f.key + ":" + f.type + " = " + f.get(cfg) + "\n";
  return out;
}

std::string config_json(const AppConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : config_fields()) {
    const std::string v = f.get(cfg);
    if (f.type == "int")
      j[f.key] = std::stoull(v);
    else if (f.type == "real")
      j[f.key] = std::stod(v);
    else if (f.type == "bool")
      j[f.key] = v == "true";
    else if (f.type == "list")
      j[f.key] = parse_list(f.key, v);
    else
      j[f.key] = v;
  }
  return j.dump();
}

std::string config_help() {
  const AppConfig defaults;
  std::ostringstream out;
  out << "Configuration keys (key:type = default):\n";
  for (const auto& f : config_fields())
    out << "  " << std::left << std::setw(24) << (f.key + ":" + f.type) << " = "
        << std::setw(12) << f.get(defaults) << " " << f.help << "\n";
  return out.str();
}

bool operator==(const AppConfig& a, const AppConfig& b) { return emit_config(a) == emit_config(b); }

}  // namespace songoku

#include "prosto/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace prosto {

ConfigError::ConfigError(std::string key, const std::string& message)
    : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

double delta_limit() { return 0.25 * 0.5 * std::erfc(1.0 / std::sqrt(2.0)); }

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

// Strips a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::vector<std::string> split_list(const std::string& key, const std::string& value) {
  std::string body = trim(value);
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']') throw ConfigError(key, "unterminated list");
    body = body.substr(1, body.size() - 2);
  }
  std::vector<std::string> items;
  if (trim(body).empty()) return items;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = unquote(trim(item));
    if (item.empty()) throw ConfigError(key, "empty list element");
    items.push_back(item);
  }
  return items;
}

long long parse_int(const std::string& key, const std::string& value) {
  const std::string v = unquote(trim(value));
  char* end = nullptr;
  errno = 0;
  const long long out = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return out;
}

int parse_int32(const std::string& key, const std::string& value) {
  const long long v = parse_int(key, value);
  if (v < -2147483647LL || v > 2147483647LL) throw ConfigError(key, "integer out of range");
  return static_cast<int>(v);
}

double parse_real(const std::string& key, const std::string& value) {
  const std::string v = unquote(trim(value));
  char* end = nullptr;
  errno = 0;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(out))
    throw ConfigError(key, "expected a finite number, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = unquote(trim(value));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v.empty() || v.front() == '-') throw ConfigError(key, "seeds must be non-negative integers, got '" + v + "'");
  char* end = nullptr;
  errno = 0;
  const unsigned long long out = std::strtoull(v.c_str(), &end, 10);
  if (*end != '\0' || errno == ERANGE) throw ConfigError(key, "seeds must be non-negative integers, got '" + v + "'");
  return out;
}

// Shortest text that round-trips.
std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "env.reward_name",      "env.m_s",           "env.m_a",          "env.H",
      "env.init_state_mode",  "env.fixed_state",   "kernel.family",    "kernel.nu",
      "kernel.lengthscale",   "run.K",             "run.seeds",        "run.delta",
      "run.allow_large_delta", "run.pool_transitions", "run.check_invariants", "run.threads",
      "schedule.mode",        "schedule.c_tau",    "schedule.c_lambda", "schedule.c_eps",
      "schedule.c_beta_t",    "schedule.c_r",      "output.out_dir",   "output.emit_plots",
      "output.verbose"};
  return keys;
}

}  // namespace

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  const std::string word = unquote(value);
  try {
    if (key == "env.reward_name") {
      c.env.reward_name = parse_reward_name(word);
    } else if (key == "env.m_s") {
      c.env.m_s = parse_int32(key, value);
    } else if (key == "env.m_a") {
      c.env.m_a = parse_int32(key, value);
    } else if (key == "env.H") {
      c.env.horizon = parse_int32(key, value);
    } else if (key == "env.init_state_mode") {
      if (word == "uniform")
        c.env.init_state_mode = InitStateMode::uniform;
      else if (word == "fixed")
        c.env.init_state_mode = InitStateMode::fixed;
      else
        throw ConfigError(key, "expected uniform or fixed, got '" + word + "'");
    } else if (key == "env.fixed_state") {
      c.env.fixed_state = parse_int32(key, value);
    } else if (key == "kernel.family") {
      if (word == "matern")
        c.kernel.family = KernelFamily::matern;
      else if (word == "squared_exponential" || word == "se")
        c.kernel.family = KernelFamily::squared_exponential;
      else
        throw ConfigError(key, "expected matern or squared_exponential, got '" + word + "'");
    } else if (key == "kernel.nu") {
      c.kernel.nu = parse_real(key, value);
    } else if (key == "kernel.lengthscale") {
      c.kernel.lengthscale = parse_real(key, value);
    } else if (key == "run.K") {
      c.run.K = parse_int32(key, value);
    } else if (key == "run.seeds") {
      std::vector<std::uint64_t> seeds;
      for (const auto& item : split_list(key, value)) seeds.push_back(parse_seed(key, item));
      c.run.seeds = std::move(seeds);
    } else if (key == "run.delta") {
      c.run.delta = parse_real(key, value);
    } else if (key == "run.allow_large_delta") {
      c.run.allow_large_delta = parse_bool(key, value);
    } else if (key == "run.pool_transitions") {
      c.run.pool_transitions = parse_bool(key, value);
    } else if (key == "run.check_invariants") {
      c.run.check_invariants = parse_bool(key, value);
    } else if (key == "run.threads") {
      c.run.threads = parse_int32(key, value);
    } else if (key == "schedule.mode") {
      if (word == "practical")
        c.schedule.mode = ScheduleMode::practical;
      else if (word == "theory_faithful")
        c.schedule.mode = ScheduleMode::theory_faithful;
      else
        throw ConfigError(key, "expected practical or theory_faithful, got '" + word + "'");
    } else if (key == "schedule.c_tau") {
      c.schedule.multipliers.c_tau = parse_real(key, value);
    } else if (key == "schedule.c_lambda") {
      c.schedule.multipliers.c_lambda = parse_real(key, value);
    } else if (key == "schedule.c_eps") {
      c.schedule.multipliers.c_eps = parse_real(key, value);
    } else if (key == "schedule.c_beta_t") {
      c.schedule.multipliers.c_beta_t = parse_real(key, value);
    } else if (key == "schedule.c_r") {
      c.schedule.multipliers.c_r = parse_real(key, value);
    } else if (key == "output.out_dir") {
      if (word.empty()) throw ConfigError(key, "empty path");
      c.output.out_dir = word;
    } else if (key == "output.emit_plots") {
      c.output.emit_plots = parse_bool(key, value);
    } else if (key == "output.verbose") {
      c.output.verbose = parse_bool(key, value);
    } else {
      throw ConfigError(key, "unknown key");
    }
  } catch (const InvalidInput& e) {
    throw ConfigError(key, e.what());
  }
}

void apply_override(ExperimentConfig& config, const std::string& key, const std::string& value) {
  apply_setting(config, key, value);
  config.overrides.emplace_back(key, value);
}

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> warnings;
  if (c.env.m_s < 1) throw ConfigError("env.m_s", "must be >= 1");
  if (c.env.m_a < 1) throw ConfigError("env.m_a", "must be >= 1");
  if (c.env.horizon < 1) throw ConfigError("env.H", "must be >= 1");
  if (c.env.init_state_mode == InitStateMode::fixed &&
      (c.env.fixed_state < 0 || c.env.fixed_state >= c.env.m_s * c.env.m_s))
    throw ConfigError("env.fixed_state", "must index the state grid (0 .. m_s^2 - 1)");
  try {
    c.kernel.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(c.kernel.family == KernelFamily::matern ? "kernel.nu" : "kernel.lengthscale", e.what());
  }
  if (c.kernel.dim != 3) throw ConfigError("kernel", "state-action inputs are 3-dimensional");
  if (c.kernel.family == KernelFamily::squared_exponential)
    throw ConfigError("kernel.family",
                      "squared_exponential has no polynomial eigen-decay; the regularizer schedule needs a Matérn kernel");
  if (c.run.K < 2) throw ConfigError("run.K", "K ≥ 2 required by schedule");
  if (c.run.seeds.empty()) throw ConfigError("run.seeds", "at least one seed required");
  if (std::set<std::uint64_t>(c.run.seeds.begin(), c.run.seeds.end()).size() != c.run.seeds.size())
    throw ConfigError("run.seeds", "duplicate seed");
  if (!(c.run.delta > 0.0 && c.run.delta < 1.0)) throw ConfigError("run.delta", "must lie in (0, 1)");
  if (c.run.delta > delta_limit()) {
    std::ostringstream msg;
    msg << "delta = " << c.run.delta << " exceeds 0.25*Phi(-1) = " << delta_limit()
        << ", the error-probability condition of the regret bound";
    if (!c.run.allow_large_delta)
      throw ConfigError("run.delta", msg.str() + " (set run.allow_large_delta = true to proceed)");
    warnings.push_back(msg.str() + "; continuing because run.allow_large_delta is set");
  }
  if (c.run.threads < 0) throw ConfigError("run.threads", "must be >= 0");
  const auto& m = c.schedule.multipliers;
  const std::pair<const char*, double> mults[] = {{"schedule.c_tau", m.c_tau},
                                                  {"schedule.c_lambda", m.c_lambda},
                                                  {"schedule.c_eps", m.c_eps},
                                                  {"schedule.c_beta_t", m.c_beta_t},
                                                  {"schedule.c_r", m.c_r}};
  for (const auto& [key, v] : mults)
    if (!(v > 0.0 && v <= 1.0)) throw ConfigError(key, "multiplier must lie in (0, 1]");
  if (c.output.out_dir.empty()) throw ConfigError("output.out_dir", "empty path");
  return warnings;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  ExperimentConfig config;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[' && body.find('=') == std::string::npos) {
      if (body.back() != ']') throw ConfigError("", where + ": malformed section header");
      section = trim(body.substr(1, body.size() - 2));
      if (section.empty()) throw ConfigError("", where + ": empty section name");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("", where + ": expected 'key = value'");
    std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError("", where + ": missing key");
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end())
      throw ConfigError(key, where + ": unknown key");
    if (!seen.insert(key).second) throw ConfigError(key, where + ": key given twice");
    if (value.empty()) throw ConfigError(key, where + ": missing value");
    apply_setting(config, key, value);
  }
  if (!seen.count("run.K")) throw ConfigError("run.K", "required key missing");
  if (!seen.count("run.seeds")) throw ConfigError("run.seeds", "required key missing");
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& c) {
  std::string seeds = "[";
  for (std::size_t i = 0; i < c.run.seeds.size(); ++i) seeds += (i ? ", " : "") + std::to_string(c.run.seeds[i]);
  seeds += "]";
  const auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  const auto& m = c.schedule.multipliers;
  return {{"env.reward_name", to_string(c.env.reward_name)},
          {"env.m_s", std::to_string(c.env.m_s)},
          {"env.m_a", std::to_string(c.env.m_a)},
          {"env.H", std::to_string(c.env.horizon)},
          {"env.init_state_mode", to_string(c.env.init_state_mode)},
          {"env.fixed_state", std::to_string(c.env.fixed_state)},
          {"kernel.family", to_string(c.kernel.family)},
          {"kernel.nu", format_real(c.kernel.nu)},
          {"kernel.lengthscale", format_real(c.kernel.lengthscale)},
          {"run.K", std::to_string(c.run.K)},
          {"run.seeds", seeds},
          {"run.delta", format_real(c.run.delta)},
          {"run.allow_large_delta", b(c.run.allow_large_delta)},
          {"run.pool_transitions", b(c.run.pool_transitions)},
          {"run.check_invariants", b(c.run.check_invariants)},
          {"run.threads", std::to_string(c.run.threads)},
          {"schedule.mode", to_string(c.schedule.mode)},
          {"schedule.c_tau", format_real(m.c_tau)},
          {"schedule.c_lambda", format_real(m.c_lambda)},
          {"schedule.c_eps", format_real(m.c_eps)},
          {"schedule.c_beta_t", format_real(m.c_beta_t)},
          {"schedule.c_r", format_real(m.c_r)},
          {"output.out_dir", c.output.out_dir},
          {"output.emit_plots", b(c.output.emit_plots)},
          {"output.verbose", b(c.output.verbose)}};
}

AgentConfig agent_config(const ExperimentConfig& c) {
  AgentConfig a;
  a.kernel = c.kernel;
  a.num_episodes = c.run.K;
  a.delta = c.run.delta;
  a.mode = c.schedule.mode;
  a.multipliers = c.schedule.multipliers;
  a.pool_transitions = c.run.pool_transitions;
  a.check_invariants = c.run.check_invariants;
  a.per_step_gains = c.output.verbose;
  return a;
}

DiscretizedMdp build_mdp(const ExperimentConfig& c) {
  return make_synthetic_mdp(c.env.reward_name, c.env.m_s, c.env.m_a, c.env.horizon);
}

}  // namespace prosto

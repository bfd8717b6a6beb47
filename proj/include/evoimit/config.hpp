#pragma once

// Run configuration: a flat `key = value` text format. Lines starting with
// '#' and blank lines are ignored; keys are single tokens, values run to the
// end of the line. Unknown or duplicate keys are errors so typos surface
// instead of silently using defaults. parse(serialize(c)) == c.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evoimit/envs.hpp"

namespace evoimit {

// User-input problem (bad file, bad key, bad value); distinct from
// ContractError so the CLI can map it to a usage exit code.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
  EnvId env = EnvId::CartPole;
  std::uint32_t population_size = 64;
  std::uint32_t generations = 100;
  double sigma = 0.1;
  std::uint64_t run_seed = 1;
  std::uint32_t holdout_seeds = 10;
  std::uint32_t eval_every = 10;
  std::uint32_t matches_per_agent = 1;
  bool elite_unmutated = false;
  std::uint32_t checkpoint_every = 50;  // 0: only the final checkpoint
  std::string out_dir = "run_out";

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  if (value.empty()) throw ConfigError(key + ": empty value");
  for (char c : value) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw ConfigError(key + ": expected a nonnegative integer, got '" + value + "'");
    }
  }
  errno = 0;
  char* end = nullptr;
  const std::uint64_t v = std::strtoull(value.c_str(), &end, 10);
  if (errno != 0 || end != value.c_str() + value.size()) {
    throw ConfigError(key + ": integer out of range: '" + value + "'");
  }
  return v;
}

inline std::uint32_t parse_u32(const std::string& key, const std::string& value) {
  const std::uint64_t v = parse_u64(key, value);
  if (v > 0xFFFFFFFFULL) throw ConfigError(key + ": integer out of range: '" + value + "'");
  return static_cast<std::uint32_t>(v);
}

inline double parse_real(const std::string& key, const std::string& value) {
  if (value.empty()) throw ConfigError(key + ": empty value");
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size()) {
    throw ConfigError(key + ": expected a real number, got '" + value + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void config_set(RunConfig& config, const std::string& key, const std::string& value) {
  using namespace detail;
  if (key == "env") {
    EnvId id;
    if (!env_from_name(value, id)) throw ConfigError("env: unknown environment '" + value + "'");
    config.env = id;
  } else if (key == "population_size") {
    config.population_size = parse_u32(key, value);
  } else if (key == "generations") {
    config.generations = parse_u32(key, value);
  } else if (key == "sigma") {
    config.sigma = parse_real(key, value);
  } else if (key == "run_seed") {
    config.run_seed = parse_u64(key, value);
  } else if (key == "holdout_seeds") {
    config.holdout_seeds = parse_u32(key, value);
  } else if (key == "eval_every") {
    config.eval_every = parse_u32(key, value);
  } else if (key == "matches_per_agent") {
    config.matches_per_agent = parse_u32(key, value);
  } else if (key == "elite_unmutated") {
    config.elite_unmutated = parse_bool(key, value);
  } else if (key == "checkpoint_every") {
    config.checkpoint_every = parse_u32(key, value);
  } else if (key == "out_dir") {
    if (value.empty()) throw ConfigError("out_dir: empty value");
    config.out_dir = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

inline RunConfig parse_config_text(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = detail::trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = detail::trim(stripped.substr(0, eq));
    const std::string value = detail::trim(stripped.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    seen.push_back(key);
    config_set(config, key, value);
  }
  return config;
}

inline std::string serialize_config(const RunConfig& config) {
  std::ostringstream out;
  out << "env = " << env_name(config.env) << '\n';
  out << "population_size = " << config.population_size << '\n';
  out << "generations = " << config.generations << '\n';
  out << "sigma = " << detail::format_real(config.sigma) << '\n';
  out << "run_seed = " << config.run_seed << '\n';
  out << "holdout_seeds = " << config.holdout_seeds << '\n';
  out << "eval_every = " << config.eval_every << '\n';
  out << "matches_per_agent = " << config.matches_per_agent << '\n';
  out << "elite_unmutated = " << (config.elite_unmutated ? "true" : "false") << '\n';
  out << "checkpoint_every = " << config.checkpoint_every << '\n';
  out << "out_dir = " << config.out_dir << '\n';
  return out.str();
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

// "key=value" as accepted on the command line.
inline void apply_override(RunConfig& config, const std::string& keyval) {
  const std::size_t eq = keyval.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must look like key=value, got '" + keyval + "'");
  }
  config_set(config, detail::trim(keyval.substr(0, eq)), detail::trim(keyval.substr(eq + 1)));
}

inline void validate_config(const RunConfig& config) {
  if (config.population_size < 2 || config.population_size % 2 != 0) {
    throw ConfigError("population_size must be even and at least 2");
  }
  if (config.sigma < 0.0) throw ConfigError("sigma must be nonnegative");
  if (config.generations < 1) throw ConfigError("generations must be at least 1");
  if (config.holdout_seeds < 1) throw ConfigError("holdout_seeds must be at least 1");
  if (config.eval_every < 1) throw ConfigError("eval_every must be at least 1");
  if (config.matches_per_agent < 1) throw ConfigError("matches_per_agent must be at least 1");
  if (config.out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

}  // namespace evoimit

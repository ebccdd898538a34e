#pragma once

// Flat key=value run configuration. Keys mirror the command-line flag names;
// "[axis NAME]" sections declare sweep axes.
//
//   scenario = stations
//   eve-fiber = hollowcore
//   l-total = 50
//
//   [axis L1]
//   min = 0
//   max = 50
//   steps = 21

#include <algorithm>
#include <charconv>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cvqkd/errors.hpp"
#include "cvqkd/sweep.hpp"

namespace cvqkd {

struct RunConfig {
  std::optional<Scenario> scenario;
  Parameters params;
  std::vector<Axis> axes;
  std::string out;
  double tol = 1e-3;
  double g_min = 1.0;
  double g_max = 100.0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_number(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("value of '" + std::string(key) + "' is not a number: '" + std::string(text) + "'");
  }
  return v;
}

inline int parse_int(std::string_view key, std::string_view text) {
  int v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("value of '" + std::string(key) + "' is not an integer: '" + std::string(text) + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("value of '" + std::string(key) + "' is not a boolean");
}

}  // namespace detail

/// Keys accepted at top level, identical to the long flag names.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "scenario", "attack", "epsilon", "va",     "beta",      "alpha-system", "eve-fiber", "l-total", "l1",
      "l2",       "gain",   "v-rho",   "detection", "direction", "out",        "tol",       "g-min",   "g-max",
      "limit-ladder", "limit-tol"};
  return keys;
}

inline void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  using detail::parse_number;
  auto& p = cfg.params;
  try {
    if (key == "scenario") cfg.scenario = parse_scenario(std::string(value));
    else if (key == "attack") p.attack = parse_attack(std::string(value));
    else if (key == "epsilon") p.epsilon = parse_number(key, value);
    else if (key == "va") p.rate.v_a = parse_number(key, value);
    else if (key == "beta") p.rate.beta = parse_number(key, value);
    else if (key == "alpha-system") p.alpha_system = parse_number(key, value);
    else if (key == "eve-fiber") p.eve_fiber = parse_fiber(value);
    else if (key == "l-total") p.l_total = parse_number(key, value);
    else if (key == "l1") p.l1 = parse_number(key, value);
    else if (key == "l2") p.l2 = parse_number(key, value);
    else if (key == "gain") p.gain = parse_number(key, value);
    else if (key == "v-rho") {
      if (value == "limit") p.v_rho.reset();
      else p.v_rho = parse_number(key, value);
    } else if (key == "detection") {
      if (value == "hom") p.rate.detection = Detection::homodyne;
      else if (value == "het") p.rate.detection = Detection::heterodyne;
      else throw ConfigError("detection must be 'hom' or 'het'");
    } else if (key == "direction") {
      if (value == "rr") p.rate.direction = Direction::reverse;
      else if (value == "dr") p.rate.direction = Direction::direct;
      else throw ConfigError("direction must be 'rr' or 'dr'");
    } else if (key == "out") cfg.out = std::string(value);
    else if (key == "tol") cfg.tol = parse_number(key, value);
    else if (key == "g-min") cfg.g_min = parse_number(key, value);
    else if (key == "g-max") cfg.g_max = parse_number(key, value);
    else if (key == "limit-tol") p.limit.tolerance = parse_number(key, value);
    else if (key == "limit-ladder") {
      p.limit.ladder.clear();
      std::string_view rest = value;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        p.limit.ladder.push_back(parse_number(key, detail::trim(rest.substr(0, comma))));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
    } else throw ConfigError("unknown key '" + std::string(key) + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

inline RunConfig parse_config(std::istream& in, RunConfig cfg = {}) {
  std::string line;
  int number = 0;
  Axis* axis = nullptr;
  while (std::getline(in, line)) {
    ++number;
    auto text = detail::trim(line);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = detail::trim(text.substr(0, hash));
    if (text.empty()) continue;
    const auto where = "line " + std::to_string(number) + ": ";
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(where + "unterminated section header");
      const auto header = detail::trim(text.substr(1, text.size() - 2));
      if (header == "run") {
        axis = nullptr;
        continue;
      }
      if (header.substr(0, 5) != "axis ") throw ConfigError(where + "unknown section '" + std::string(header) + "'");
      const auto name = std::string(detail::trim(header.substr(5)));
      if (std::find(axis_names().begin(), axis_names().end(), name) == axis_names().end()) {
        throw ConfigError(where + "unknown axis '" + name + "'");
      }
      cfg.axes.push_back(Axis{name, 0.0, 0.0, 2, false});
      axis = &cfg.axes.back();
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    const auto key = detail::trim(text.substr(0, eq));
    const auto value = detail::trim(text.substr(eq + 1));
    try {
      if (axis) {
        if (key == "min") axis->min = detail::parse_number(key, value);
        else if (key == "max") axis->max = detail::parse_number(key, value);
        else if (key == "steps") axis->steps = detail::parse_int(key, value);
        else if (key == "log") axis->log = detail::parse_bool(key, value);
        else throw ConfigError("unknown axis key '" + std::string(key) + "'");
      } else {
        apply_setting(cfg, key, value);
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return cfg;
}

}  // namespace cvqkd

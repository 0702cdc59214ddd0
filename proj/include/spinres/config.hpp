#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "spinres/errors.hpp"
#include "spinres/integrator.hpp"
#include "spinres/io.hpp"
#include "spinres/params.hpp"

namespace spinres {

/// Everything a run can be configured with. Defaults are the standard
/// parameter set and the desk-scale protocol.
struct Settings {
  RunConfig run;
  PhysicalParams params;
  std::string output;
  int gpu_device = -1;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Accepts plain integers and integral scientific notation ("1e4").
inline std::uint64_t parse_count(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && ptr == s.data() + s.size() && !s.empty()) return v;
  const double d = parse_double(s);
  if (!(d >= 0.0) || d != std::floor(d) || d > 9.007199254740992e15)
    throw ConfigError("not a non-negative integer: '" + std::string(s) + "'");
  return static_cast<std::uint64_t>(d);
}

using Setter = std::function<void(Settings&, std::string_view)>;

inline const std::map<std::string, Setter, std::less<>>& config_setters() {
  static const std::map<std::string, Setter, std::less<>> setters = [] {
    std::map<std::string, Setter, std::less<>> m;
    auto real = [](double PhysicalParams::*field) {
      return [field](Settings& s, std::string_view v) { s.params.*field = parse_double(v); };
    };
    m["n"] = [](Settings& s, std::string_view v) { s.run.n = parse_count(v); };
    m["dt"] = [](Settings& s, std::string_view v) { s.run.dt = parse_double(v); };
    m["steps"] = [](Settings& s, std::string_view v) { s.run.steps = parse_count(v); };
    m["seed"] = [](Settings& s, std::string_view v) { s.run.seed = parse_count(v); };
    m["phi0"] = [](Settings& s, std::string_view v) { s.run.phi0 = parse_double(v); };
    m["backend"] = [](Settings& s, std::string_view v) { s.run.backend = std::string(v); };
    m["record_stride"] = [](Settings& s, std::string_view v) { s.run.record_stride = parse_count(v); };
    m["n_in"] = [](Settings& s, std::string_view v) { s.run.n_in = parse_count(v); };
    m["output"] = [](Settings& s, std::string_view v) { s.output = std::string(v); };
    m["gpu_device"] = [](Settings& s, std::string_view v) {
      s.gpu_device = static_cast<int>(parse_count(v));
    };
    m["gamma"] = real(&PhysicalParams::gamma);
    m["alpha"] = real(&PhysicalParams::alpha);
    m["m_sat"] = real(&PhysicalParams::m_sat);
    m["h_k"] = real(&PhysicalParams::h_k);
    m["h_appl"] = real(&PhysicalParams::h_appl);
    m["eta"] = real(&PhysicalParams::eta);
    m["lambda_stt"] = real(&PhysicalParams::lambda_stt);
    m["current"] = real(&PhysicalParams::current);
    m["volume"] = real(&PhysicalParams::volume);
    m["charge_e"] = real(&PhysicalParams::charge_e);
    m["hbar"] = real(&PhysicalParams::hbar);
    m["a_cp"] = real(&PhysicalParams::a_cp);
    m["a_in"] = real(&PhysicalParams::a_in);
    m["p_x"] = [](Settings& s, std::string_view v) { s.params.p_vec[0] = parse_double(v); };
    m["p_y"] = [](Settings& s, std::string_view v) { s.params.p_vec[1] = parse_double(v); };
    m["p_z"] = [](Settings& s, std::string_view v) { s.params.p_vec[2] = parse_double(v); };
    return m;
  }();
  return setters;
}

}  // namespace detail

/// Applies `key = value` lines on top of `settings`. `#` starts a comment.
/// Unknown keys and malformed lines raise ConfigError with the line number.
inline void apply_config(std::string_view text, Settings& settings) {
  const auto& setters = detail::config_setters();
  std::size_t lineno = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++lineno;
    std::string_view line = raw.substr(0, raw.find('#'));
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", lineno);
    const std::string_view key = detail::trim(line.substr(0, eq));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown key '" + std::string(key) + "'", lineno);
    if (value.empty()) throw ConfigError("missing value for '" + std::string(key) + "'", lineno);
    try {
      it->second(settings, value);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(key) + ": " + e.what(), lineno);
    }
  }
}

inline void apply_config_file(const std::string& path, Settings& settings) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config(buf.str(), settings);
}

}  // namespace spinres

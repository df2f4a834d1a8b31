#pragma once

// Flat `key = value` run configuration. '#' starts a comment.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hexkerr/error.hpp"
#include "hexkerr/fluctuations.hpp"
#include "hexkerr/fock.hpp"

namespace hexkerr {

struct RunConfig {
  std::optional<double> delta;  // unset: delta = |E_0s|^2 = |E_in|^2
  double drive = 1.1;
  double drive_low = 0.8;
  double drive_high = 1.3;
  double drive_step = 0.01;       // spacing of best-squeeze drives
  double ramp_rate = 5e-6;        // sweep rate d|E_in|^2 / d(gamma t)
  double step = 2e-2;             // RK4 step
  double sample_spacing = 2.5e-3;
  double threshold = 1e-2;        // |beta| level marking a branch change
  std::uint64_t seed = 1;
  double newton_tol = 1e-13;
  double steady_tol = 1e-9;
  double max_time = 20000.0;
  Observable observable = Observable::W;
  int index = 1;
  std::string angles = "opt";
  int freq_log_points = 300;
  double freq_min = 1e-3;
  double freq_knee = 1.0;
  double freq_max = 100.0;
  int freq_lin_points = 99;
  Cutoffs cutoffs{2, 1, 1, 1, 1, 1, 1};
  std::vector<Cutoffs> extra_cutoffs{{3, 2, 2, 2, 2, 2, 2}};
  std::optional<int> total_cutoff;
  std::size_t basis_cap = kDefaultBasisCap;
  int oracle_draws = 3;
  std::string out_dir = ".";

  /// Throws ErrorCode::Config on any out-of-range field.
  void validate() const;
};

namespace detail {

inline std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

[[noreturn]] inline void config_error(const std::string& msg) { throw Error(ErrorCode::Config, msg); }

inline double parse_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc{} || ptr != end || !std::isfinite(x)) config_error(key + ": not a finite number: '" + v + "'");
  return x;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc{} || ptr != end) config_error(key + ": not an integer: '" + v + "'");
  return x;
}

inline Cutoffs parse_cutoffs(const std::string& key, const std::string& v) {
  Cutoffs c{};
  std::istringstream is(v);
  std::string tok;
  std::size_t n = 0;
  while (std::getline(is, tok, ',')) {
    if (n >= c.size()) config_error(key + ": expected 7 comma-separated cutoffs");
    c[n++] = static_cast<int>(parse_int(key, trim(tok)));
  }
  if (n != c.size()) config_error(key + ": expected 7 comma-separated cutoffs");
  return c;
}

}  // namespace detail

inline Observable parse_observable(const std::string& v) {
  if (v == "W" || v == "w") return Observable::W;
  if (v == "Q" || v == "q") return Observable::Q;
  if (v == "X" || v == "x") return Observable::X;
  throw Error(ErrorCode::Config, "observable must be W, Q or X, got '" + v + "'");
}

/// Applies one key/value pair.
inline void set_option(RunConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_double;
  using detail::parse_int;
  const std::string v = detail::trim(value);
  if (key == "delta") {
    if (v == "tied") cfg.delta.reset();
    else cfg.delta = parse_double(key, v);
  } else if (key == "drive") cfg.drive = parse_double(key, v);
  else if (key == "drive_low") cfg.drive_low = parse_double(key, v);
  else if (key == "drive_high") cfg.drive_high = parse_double(key, v);
  else if (key == "drive_step") cfg.drive_step = parse_double(key, v);
  else if (key == "ramp_rate") cfg.ramp_rate = parse_double(key, v);
  else if (key == "step") cfg.step = parse_double(key, v);
  else if (key == "sample_spacing") cfg.sample_spacing = parse_double(key, v);
  else if (key == "threshold") cfg.threshold = parse_double(key, v);
  else if (key == "seed") {
    const long long s = parse_int(key, v);
    if (s < 0) detail::config_error("seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  } else if (key == "newton_tol") cfg.newton_tol = parse_double(key, v);
  else if (key == "steady_tol") cfg.steady_tol = parse_double(key, v);
  else if (key == "max_time") cfg.max_time = parse_double(key, v);
  else if (key == "observable") cfg.observable = parse_observable(v);
  else if (key == "index") cfg.index = static_cast<int>(parse_int(key, v));
  else if (key == "angles") cfg.angles = v;
  else if (key == "freq_log_points") cfg.freq_log_points = static_cast<int>(parse_int(key, v));
  else if (key == "freq_min") cfg.freq_min = parse_double(key, v);
  else if (key == "freq_knee") cfg.freq_knee = parse_double(key, v);
  else if (key == "freq_max") cfg.freq_max = parse_double(key, v);
  else if (key == "freq_lin_points") cfg.freq_lin_points = static_cast<int>(parse_int(key, v));
  else if (key == "cutoffs") cfg.cutoffs = detail::parse_cutoffs(key, v);
  else if (key == "extra_cutoffs") {
    cfg.extra_cutoffs.clear();
    std::istringstream is(v);
    std::string tok;
    while (std::getline(is, tok, ';')) {
      tok = detail::trim(tok);
      if (!tok.empty()) cfg.extra_cutoffs.push_back(detail::parse_cutoffs(key, tok));
    }
  } else if (key == "total_cutoff") {
    if (v == "none") cfg.total_cutoff.reset();
    else cfg.total_cutoff = static_cast<int>(parse_int(key, v));
  } else if (key == "basis_cap") {
    const long long c = parse_int(key, v);
    if (c <= 0) detail::config_error("basis_cap must be positive");
    cfg.basis_cap = static_cast<std::size_t>(c);
  } else if (key == "oracle_draws") cfg.oracle_draws = static_cast<int>(parse_int(key, v));
  else if (key == "out_dir") cfg.out_dir = v;
  else detail::config_error("unknown configuration key '" + key + "'");
}

inline RunConfig parse_config(std::istream& in, RunConfig cfg = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      detail::config_error("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    if (key.empty()) detail::config_error("line " + std::to_string(lineno) + ": empty key");
    set_option(cfg, key, line.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

inline RunConfig load_config(const std::string& path, RunConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file '" + path + "'");
  return parse_config(in, std::move(cfg));
}

inline void RunConfig::validate() const {
  auto positive = [](const char* name, double x) {
    if (!(x > 0.0)) detail::config_error(std::string(name) + " must be positive");
  };
  if (delta && *delta >= 2.0) detail::config_error("delta must be below 2 for a transverse instability");
  positive("drive", drive);
  positive("drive_low", drive_low);
  if (!(drive_high > drive_low)) detail::config_error("drive_high must exceed drive_low");
  positive("drive_step", drive_step);
  positive("ramp_rate", ramp_rate);
  positive("step", step);
  if (step > 0.2) detail::config_error("step must not exceed 0.2");
  positive("sample_spacing", sample_spacing);
  positive("threshold", threshold);
  positive("newton_tol", newton_tol);
  positive("steady_tol", steady_tol);
  positive("max_time", max_time);
  if (index < 1 || index > 6) detail::config_error("index must be in 1..6");
  if (freq_log_points < 2 || freq_lin_points < 1) detail::config_error("frequency grid needs >= 2 log and >= 1 linear points");
  positive("freq_min", freq_min);
  if (!(freq_knee > freq_min) || !(freq_max > freq_knee)) detail::config_error("need freq_min < freq_knee < freq_max");
  auto check_cut = [](const Cutoffs& c) {
    for (const int x : c) {
      if (x < 0) detail::config_error("cutoffs must be non-negative");
    }
  };
  check_cut(cutoffs);
  for (const auto& c : extra_cutoffs) check_cut(c);
  if (total_cutoff && *total_cutoff < 0) detail::config_error("total_cutoff must be non-negative");
  if (oracle_draws < 1) detail::config_error("oracle_draws must be at least 1");
  if (out_dir.empty()) detail::config_error("out_dir must not be empty");
}

}  // namespace hexkerr

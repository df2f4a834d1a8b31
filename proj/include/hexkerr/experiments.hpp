#pragma once

// Reproducible experiments behind the command-line tool. Each cmd_* writes
// CSV artifacts into cfg.out_dir and returns the computed data.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hexkerr/config.hpp"
#include "hexkerr/csv.hpp"
#include "hexkerr/dynamics.hpp"
#include "hexkerr/error.hpp"
#include "hexkerr/fluctuations.hpp"
#include "hexkerr/fock.hpp"
#include "hexkerr/model.hpp"
#include "hexkerr/spectra.hpp"
#include "hexkerr/steady_state.hpp"

namespace hexkerr {

// Parallelism ------------------------------------------------------------

/// HEXKERR_THREADS if set to a positive integer, else the hardware count.
inline unsigned worker_count() {
  if (const char* env = std::getenv("HEXKERR_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs f(0..n-1) on up to worker_count() threads. The exception of the
/// lowest failing index is rethrown.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) f(k);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        f(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Hexagon solutions --------------------------------------------------------

inline ModelParams params_for(const std::optional<double>& delta, double drive) {
  return delta ? ModelParams::at_criticality(*delta, Complex{std::sqrt(drive), 0.0}) : ModelParams::tied(drive);
}

inline DriveFamily family_for(const std::optional<double>& delta) {
  return delta ? fixed_detuning_family(*delta) : tied_detuning_family();
}

/// Homogeneous amplitude on the lowest branch.
inline Complex lowest_e0s(const ModelParams& p) {
  return homogeneous_amplitude(p, homogeneous_steady_states(p).front());
}

struct HexagonSolution {
  ModelParams params;
  Complex e0s;
  SolverReport report;
  HexSteadyState hex;  // gauged: dphi1 = dphi3 = 0
  std::optional<SteadyRun> integration;
};

namespace detail {

inline HexSteadyState hex_from_vars(const RealVars& x, Complex e0s) {
  const double m = std::abs(e0s);
  const Complex rot = e0s / m;
  const Amplitudes am = to_amplitudes(x, m);
  return {am.beta0 * rot, std::abs(am.beta), std::arg(am.beta * rot), 0.0, 0.0};
}

inline RealVars vars_from_hex(const HexSteadyState& gauged, Complex e0s) {
  const double m = std::abs(e0s);
  const Complex back = std::conj(e0s) / m;
  return from_amplitudes(gauged.beta0 * back, gauged.beta() * back, m);
}

}  // namespace detail

/// Newton solution at one drive, from `guess` or from the default seeds.
inline HexagonSolution newton_hexagon(const ModelParams& p, double tol, const std::optional<RealVars>& guess = {}) {
  const Complex e0s = lowest_e0s(p);
  const double x = std::norm(e0s);
  HexagonSolution sol{p, e0s, {}, {}, {}};
  if (guess) {
    sol.report = newton_solve(*guess, x, p.delta, tol);
    if (sol.report.branch != Branch::Hexagon) {
      throw Error(ErrorCode::NoHexagon, "Newton converged to the homogeneous root at drive " + format_number(p.drive_intensity()));
    }
  } else {
    sol.report = find_hexagon(x, p.delta, tol);
  }
  sol.hex = detail::hex_from_vars(sol.report.vars, e0s);
  return sol;
}

/// Long-time integration from a strongly seeded homogeneous state; nullopt
/// when the run does not settle on a hexagon.
inline std::optional<std::pair<HexSteadyState, SteadyRun>> integrated_hexagon(const ModelParams& p, double step,
                                                                               double max_time, double tol,
                                                                               std::uint64_t seed) {
  ModeState s = homogeneous_state(p);
  add_seed(s, 0.15 * std::sqrt(std::max(p.drive_intensity(), 1e-12)), seed_phases(seed));
  const SteadyRun run = run_to_steady(s, p, step, max_time, tol);
  if (!run.converged) return std::nullopt;
  try {
    const HexSteadyState raw = extract_hexagon(run.state, 1e-6);
    if (raw.beta_mag < 1e-3) return std::nullopt;
    return std::make_pair(raw, run);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SymmetryViolation) throw;
    return std::nullopt;  // settled on some other pattern
  }
}

/// Hexagon at one drive: integration, then a Newton polish of its gauged
/// state. Falls back to the default Newton seeds when the integration does
/// not reach a hexagon.
inline HexagonSolution polished_hexagon(const RunConfig& cfg, double drive) {
  const ModelParams p = params_for(cfg.delta, drive);
  if (auto integ = integrated_hexagon(p, cfg.step, cfg.max_time, cfg.steady_tol, cfg.seed)) {
    const Complex e0s = lowest_e0s(p);
    const RealVars guess = detail::vars_from_hex(gauge_translate(integ->first), e0s);
    HexagonSolution sol = newton_hexagon(p, cfg.newton_tol, guess);
    sol.integration = integ->second;
    return sol;
  }
  return newton_hexagon(p, cfg.newton_tol);
}

/// Drives from high down to low in steps of `spacing`, then reversed.
inline std::vector<double> drive_list(double low, double high, double spacing) {
  std::vector<double> d;
  const auto n = static_cast<long long>(std::floor((high - low) / spacing + 1e-9));
  for (long long k = 0; k <= n; ++k) d.push_back(high - spacing * static_cast<double>(k));
  return d;
}

/// Stable hexagon branch over [low, high] by continuation downwards from a
/// polished solution at the top; stops where the branch ends or turns
/// unstable. Ascending order.
inline std::vector<HexagonSolution> hexagon_branch(const RunConfig& cfg, double low, double high, double spacing) {
  std::vector<HexagonSolution> out;
  for (const double d : drive_list(low, high, spacing)) {
    try {
      if (out.empty()) out.push_back(polished_hexagon(cfg, d));
      else {
        HexagonSolution next = newton_hexagon(params_for(cfg.delta, d), cfg.newton_tol, out.back().report.vars);
        // past the fold Newton can land on the unstable lower branch
        if (max_growth_rate(build_full(next.hex, next.params.delta)) > 1e-9) break;
        out.push_back(std::move(next));
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoHexagon && e.code() != ErrorCode::NotConverged &&
          e.code() != ErrorCode::SingularJacobian) {
        throw;
      }
      if (!out.empty()) break;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// Angles ---------------------------------------------------------------------

/// "opt", "phi", "phi+x", "phi-x" or a number (radians).
inline double resolve_angle(const std::string& token, double phi, double opt) {
  if (token == "opt") return opt;
  if (token.rfind("phi", 0) == 0) {
    const std::string rest = token.substr(3);
    if (rest.empty()) return phi;
    if (rest[0] != '+' && rest[0] != '-') throw Error(ErrorCode::Config, "bad angle token '" + token + "'");
    const double off = detail::parse_double("angle", rest.substr(1));
    return rest[0] == '+' ? phi + off : phi - off;
  }
  return detail::parse_double("angle", token);
}

inline std::vector<std::string> split_angles(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    tok = detail::trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  if (out.empty()) throw Error(ErrorCode::Config, "no quadrature angles given");
  return out;
}

inline std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
  return std::filesystem::path(cfg.out_dir) / name;
}

// Commands -------------------------------------------------------------------

struct HysteresisReport {
  SweepResult forward;
  SweepResult backward;
  std::optional<double> jump_up;
  std::optional<double> drop_down;
};

inline HysteresisReport cmd_hysteresis(const RunConfig& cfg) {
  SweepOptions base;
  base.low = cfg.drive_low;
  base.high = cfg.drive_high;
  base.ramp_rate = cfg.ramp_rate;
  base.step = cfg.step;
  base.sample_spacing = cfg.sample_spacing;
  base.seed = cfg.seed;
  const DriveFamily family = family_for(cfg.delta);

  HysteresisReport rep{{SweepDirection::Forward, {}}, {SweepDirection::Backward, {}}, {}, {}};
  parallel_for(2, [&](std::size_t k) {
    SweepOptions o = base;
    o.direction = k == 0 ? SweepDirection::Forward : SweepDirection::Backward;
    (k == 0 ? rep.forward : rep.backward) = sweep(family, o);
  });
  rep.jump_up = jump_up_drive(rep.forward, cfg.threshold);
  rep.drop_down = drop_down_drive(rep.backward, cfg.threshold);

  const std::vector<Column> cols{{"e_in_sq", "1"}, {"beta_mag", "1"}, {"beta0_mag", "1"}, {"direction", "1"}};
  for (const auto* s : {&rep.forward, &rep.backward}) {
    const std::string dir(to_string(s->direction));
    CsvWriter w(out_path(cfg, "hysteresis_" + dir + ".csv"), cols);
    for (const auto& p : s->points) {
      w.row(std::vector<std::string>{format_number(p.e_in_sq), format_number(p.beta_mag), format_number(p.beta0_mag), dir});
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double up = rep.jump_up.value_or(nan);
  const double down = rep.drop_down.value_or(nan);
  CsvWriter w(out_path(cfg, "hysteresis_summary.csv"), {{"jump_up", "1"}, {"drop_down", "1"}, {"width", "1"}});
  w.row(std::vector<double>{up, down, up - down});
  return rep;
}

struct SteadyReport {
  HexagonSolution solution;
  double growth_rate;
};

inline SteadyReport cmd_steady(const RunConfig& cfg) {
  SteadyReport rep{polished_hexagon(cfg, cfg.drive), 0.0};
  const auto& s = rep.solution;
  rep.growth_rate = max_growth_rate(build_full(s.hex, s.params.delta));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double integ_beta = nan, integ_beta0 = nan;
  if (s.integration) {
    integ_beta = s.integration->state.hex_magnitude();
    integ_beta0 = std::abs(s.integration->state.alpha[0]);
  }
  CsvWriter w(out_path(cfg, "steady.csv"), {{"drive", "1"},
                                            {"delta", "gamma"},
                                            {"beta0_re", "1"},
                                            {"beta0_im", "1"},
                                            {"beta_mag", "1"},
                                            {"phi", "rad"},
                                            {"residual", "1"},
                                            {"integrated_beta_mag", "1"},
                                            {"integrated_beta0_mag", "1"},
                                            {"max_growth_rate", "gamma"}});
  w.row(std::vector<double>{cfg.drive, s.params.delta, s.hex.beta0.real(), s.hex.beta0.imag(), s.hex.beta_mag, s.hex.phi,
                            s.report.residual_norm, integ_beta, integ_beta0, rep.growth_rate});
  return rep;
}

struct SpectrumReport {
  HexagonSolution solution;
  ReducedLinearSystem system;
  std::vector<std::string> tokens;
  std::vector<double> angles;
  std::vector<double> omegas;
  std::vector<std::vector<double>> values;  // values[a][k] = S(angles[a], omegas[k])
};

inline std::vector<double> config_grid(const RunConfig& cfg) {
  return frequency_grid(cfg.freq_log_points, cfg.freq_min, cfg.freq_knee, cfg.freq_max, cfg.freq_lin_points);
}

inline SpectrumReport spectrum_for(const RunConfig& cfg, const HexagonSolution& sol) {
  SpectrumReport rep{sol, build_reduced(sol.hex, cfg.observable, cfg.index), split_angles(cfg.angles), {}, config_grid(cfg),
                     {}};
  const double opt = best_squeezing(rep.system, 0.0).psi_opt;
  for (const auto& t : rep.tokens) rep.angles.push_back(resolve_angle(t, sol.hex.phi, opt));
  rep.values.resize(rep.angles.size());
  parallel_for(rep.angles.size(), [&](std::size_t a) {
    for (const double w : rep.omegas) rep.values[a].push_back(quadrature_spectrum(rep.system, rep.angles[a], w));
  });
  return rep;
}

/// "W", "Q1", "X2": file-name friendly system label.
inline std::string file_tag(const ReducedLinearSystem& sys) {
  std::string t(to_string(sys.label));
  if (sys.index != 0) t += std::to_string(sys.index);
  return t;
}

inline SpectrumReport cmd_spectrum(const RunConfig& cfg) {
  SpectrumReport rep = spectrum_for(cfg, polished_hexagon(cfg, cfg.drive));
  std::vector<Column> cols{{"omega_over_gamma", "1"}};
  for (std::size_t a = 0; a < rep.angles.size(); ++a) {
    cols.push_back({rep.angles.size() == 1 ? std::string("s") : "s_" + rep.tokens[a], "shot_noise"});
  }
  CsvWriter w(out_path(cfg, "spectrum_" + file_tag(rep.system) + ".csv"), cols);
  for (std::size_t k = 0; k < rep.omegas.size(); ++k) {
    std::vector<double> row{rep.omegas[k]};
    for (const auto& v : rep.values) row.push_back(v[k]);
    w.row(row);
  }
  CsvWriter aw(out_path(cfg, "spectrum_" + file_tag(rep.system) + "_angles.csv"),
               {{"token", "1"}, {"psi", "rad"}, {"phi", "rad"}});
  for (std::size_t a = 0; a < rep.angles.size(); ++a) {
    aw.row(std::vector<std::string>{rep.tokens[a], format_number(rep.angles[a]), format_number(rep.solution.hex.phi)});
  }
  return rep;
}

struct BestSqueezeRow {
  double drive;
  Observable observable;
  double psi_opt;
  double s_min;
};

inline std::vector<BestSqueezeRow> best_squeeze_rows(const RunConfig& cfg, const std::vector<HexagonSolution>& branch,
                                                     const std::vector<Observable>& observables) {
  std::vector<BestSqueezeRow> rows(branch.size() * observables.size());
  parallel_for(branch.size(), [&](std::size_t k) {
    for (std::size_t o = 0; o < observables.size(); ++o) {
      const Squeezing sq = best_squeezing(build_reduced(branch[k].hex, observables[o], cfg.index), 0.0);
      rows[k * observables.size() + o] = {branch[k].params.drive_intensity(), observables[o], sq.psi_opt, sq.s_min};
    }
  });
  return rows;
}

inline std::vector<BestSqueezeRow> cmd_best_squeeze(const RunConfig& cfg, const std::vector<Observable>& observables) {
  const auto branch = hexagon_branch(cfg, cfg.drive_low, cfg.drive_high, cfg.drive_step);
  const auto rows = best_squeeze_rows(cfg, branch, observables);
  CsvWriter bw(out_path(cfg, "branch.csv"), {{"e0s_sq", "1"},
                                             {"u0", "1"},
                                             {"v0", "1"},
                                             {"u1", "1"},
                                             {"v1", "1"},
                                             {"beta_mag", "1"},
                                             {"beta0_mag", "1"},
                                             {"residual", "1"}});
  for (const auto& b : branch) {
    const auto& v = b.report.vars;
    bw.row(std::vector<double>{std::norm(b.e0s), v.u0, v.v0, v.u1, v.v1, b.hex.beta_mag, std::abs(b.hex.beta0),
                               b.report.residual_norm});
  }
  CsvWriter w(out_path(cfg, "best_squeeze.csv"),
              {{"e_in_sq", "1"}, {"observable_label", "1"}, {"psi_opt", "rad"}, {"s_min", "shot_noise"}});
  for (const auto& r : rows) {
    w.row(std::vector<std::string>{format_number(r.drive), std::string(to_string(r.observable)), format_number(r.psi_opt),
                                   format_number(r.s_min)});
  }
  return rows;
}

struct OracleCheck {
  std::string cutoffs;
  int draw;
  double g;
  double delta;
  Complex e_in;
  std::string op;
  std::string hamiltonian;
  double norm;
  bool expect_zero;  // true: must vanish; false: must be nonzero

  [[nodiscard]] bool pass() const { return expect_zero ? norm < 1e-12 : norm > 1e-3; }
};

struct OracleReport {
  std::vector<OracleCheck> checks;
  [[nodiscard]] bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const OracleCheck& c) { return c.pass(); });
  }
};

inline std::string cutoffs_label(const Cutoffs& c) {
  std::string s;
  for (std::size_t k = 0; k < c.size(); ++k) s += (k ? "," : "") + std::to_string(c[k]);
  return s;
}

/// Conservation checks for one basis and one (g, delta, e_in) draw.
inline std::vector<OracleCheck> oracle_checks(const std::shared_ptr<const FockBasis>& basis, int draw, double g,
                                              double delta, Complex e_in) {
  const std::string label = cutoffs_label(basis->cutoffs());
  std::vector<OracleCheck> out;
  auto add = [&](std::string op, std::string ham, double norm, bool zero) {
    out.push_back({label, draw, g, delta, e_in, std::move(op), std::move(ham), norm, zero});
  };
  require_pump_cutoff(*basis);
  std::vector<SparseOperator> pieces;
  for (const auto t : kInteractionTerms) pieces.push_back(build_term(t, g, 1.0, basis));
  const SparseOperator free = build_free_and_drive(delta, e_in, basis);
  SparseOperator total = free;
  for (const auto& p : pieces) total += p;

  for (int i = 1; i <= 6; ++i) {
    const SparseOperator nm = number_combination(basis, i);
    const std::string name = "N-(" + std::to_string(i) + ")";
    add(name, "H_total", commutator_norm(nm, total), true);
    for (std::size_t t = 0; t < pieces.size(); ++t) {
      add(name, std::string(to_string(kInteractionTerms[t])), commutator_norm(nm, pieces[t]), true);
    }
    add(name, "H_free+H_ext", commutator_norm(nm, free), true);
  }
  const SparseOperator d14 = number(basis, 1) - number(basis, 4);
  add("N1-N4", "H_FWM3", commutator_norm(d14, pieces[4]), false);
  add("N1-N4", "H_total", commutator_norm(d14, total), false);
  return out;
}

inline OracleReport cmd_oracle(const RunConfig& cfg) {
  std::vector<Cutoffs> sets{cfg.cutoffs};
  sets.insert(sets.end(), cfg.extra_cutoffs.begin(), cfg.extra_cutoffs.end());

  struct Draw {
    double g, delta;
    Complex e_in;
  };
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> ug(0.1, 2.0), ud(-1.0, 1.9), ua(0.0, 1.0), uph(0.0, 2.0 * std::numbers::pi);
  std::vector<Draw> draws;
  for (int k = 0; k < cfg.oracle_draws; ++k) {
    const double g = ug(rng), delta = ud(rng), amp = ua(rng), ph = uph(rng);
    draws.push_back({g, delta, std::polar(amp, ph)});
  }

  std::vector<std::shared_ptr<const FockBasis>> bases;
  for (const auto& c : sets) {
    auto b = std::make_shared<const FockBasis>(c, cfg.total_cutoff, cfg.basis_cap);
    require_pump_cutoff(*b);
    bases.push_back(std::move(b));
  }

  std::vector<std::vector<OracleCheck>> parts(bases.size() * draws.size());
  parallel_for(parts.size(), [&](std::size_t k) {
    const auto& d = draws[k % draws.size()];
    parts[k] = oracle_checks(bases[k / draws.size()], static_cast<int>(k % draws.size()), d.g, d.delta, d.e_in);
  });
  OracleReport rep;
  for (auto& p : parts) rep.checks.insert(rep.checks.end(), p.begin(), p.end());

  CsvWriter w(out_path(cfg, "oracle.csv"), {{"cutoffs", "1"},
                                            {"draw", "1"},
                                            {"g", "1"},
                                            {"delta", "gamma"},
                                            {"e_in_re", "1"},
                                            {"e_in_im", "1"},
                                            {"operator", "1"},
                                            {"hamiltonian", "1"},
                                            {"commutator_norm", "gamma"},
                                            {"expect", "1"},
                                            {"pass", "1"}});
  for (const auto& c : rep.checks) {
    w.row(std::vector<std::string>{"\"" + c.cutoffs + "\"", std::to_string(c.draw), format_number(c.g),
                                   format_number(c.delta), format_number(c.e_in.real()), format_number(c.e_in.imag()),
                                   c.op, c.hamiltonian, format_number(c.norm), c.expect_zero ? "zero" : "nonzero",
                                   c.pass() ? "1" : "0"});
  }
  return rep;
}

}  // namespace hexkerr

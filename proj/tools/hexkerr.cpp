// hexkerr: command-line front end for the seven-mode Kerr hexagon toolkit.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hexkerr/hexkerr.hpp"

namespace {

using namespace hexkerr;

struct Flags {
  std::string config;
  std::optional<std::string> out_dir;
  std::optional<long long> seed;
  std::optional<std::string> delta;
  std::optional<std::string> drive;
  std::optional<std::string> observable;
  std::optional<std::string> angle;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key = value configuration file");
  cmd->add_option("--out-dir", f.out_dir, "directory for CSV output");
  cmd->add_option("--seed", f.seed, "perturbation / draw seed");
  cmd->add_option("--delta", f.delta, "cavity detuning, or 'tied' for delta = |E_in|^2");
  cmd->add_option("--drive", f.drive, "drive |E_in|^2, or a range low:high");
  cmd->add_option("--observable", f.observable, "W, Q or X");
  cmd->add_option("--angle", f.angle, "comma list of angles: opt, phi, phi+x, phi-x or radians");
}

RunConfig build_config(const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) cfg = load_config(f.config);
  if (f.out_dir) set_option(cfg, "out_dir", *f.out_dir);
  if (f.seed) set_option(cfg, "seed", std::to_string(*f.seed));
  if (f.delta) set_option(cfg, "delta", *f.delta);
  if (f.drive) {
    if (const auto colon = f.drive->find(':'); colon != std::string::npos) {
      set_option(cfg, "drive_low", f.drive->substr(0, colon));
      set_option(cfg, "drive_high", f.drive->substr(colon + 1));
    } else {
      set_option(cfg, "drive", *f.drive);
    }
  }
  if (f.observable) set_option(cfg, "observable", *f.observable);
  if (f.angle) set_option(cfg, "angles", *f.angle);
  cfg.validate();
  return cfg;
}

std::string opt_str(const std::optional<double>& x) { return x ? format_number(*x) : std::string("none"); }

int run_hysteresis(const RunConfig& cfg) {
  const auto rep = cmd_hysteresis(cfg);
  std::printf("jump_up=%s drop_down=%s\n", opt_str(rep.jump_up).c_str(), opt_str(rep.drop_down).c_str());
  return 0;
}

int run_steady(const RunConfig& cfg) {
  const auto rep = cmd_steady(cfg);
  const auto& h = rep.solution.hex;
  std::printf("drive=%s beta0=(%s,%s) beta_mag=%s phi=%s residual=%s growth=%s\n", format_number(cfg.drive).c_str(),
              format_number(h.beta0.real()).c_str(), format_number(h.beta0.imag()).c_str(),
              format_number(h.beta_mag).c_str(), format_number(h.phi).c_str(),
              format_number(rep.solution.report.residual_norm).c_str(), format_number(rep.growth_rate).c_str());
  return 0;
}

int run_spectrum(const RunConfig& cfg) {
  const auto rep = cmd_spectrum(cfg);
  for (std::size_t a = 0; a < rep.angles.size(); ++a) {
    std::printf("%s %s psi=%s S(0)=%s\n", rep.system.name().c_str(), rep.tokens[a].c_str(),
                format_number(rep.angles[a]).c_str(), format_number(rep.values[a].front()).c_str());
  }
  return 0;
}

int run_best_squeeze(const RunConfig& cfg, bool one_observable) {
  std::vector<Observable> obs{Observable::W, Observable::Q, Observable::X};
  if (one_observable) obs = {cfg.observable};
  const auto rows = cmd_best_squeeze(cfg, obs);
  std::printf("rows=%zu\n", rows.size());
  return 0;
}

int run_oracle(const RunConfig& cfg) {
  const auto rep = cmd_oracle(cfg);
  double worst_zero = 0.0, min_nonzero = -1.0;
  for (const auto& c : rep.checks) {
    if (c.expect_zero) worst_zero = std::max(worst_zero, c.norm);
    else if (min_nonzero < 0.0 || c.norm < min_nonzero) min_nonzero = c.norm;
  }
  std::printf("checks=%zu max_conserved_commutator=%s min_nonconserved_commutator=%s %s\n", rep.checks.size(),
              format_number(worst_zero).c_str(), format_number(min_nonzero).c_str(), rep.all_pass() ? "PASS" : "FAIL");
  return rep.all_pass() ? 0 : 3;
}

void print_error(const std::string& code, const std::string& msg) {
  std::string one_line = msg;
  for (auto& ch : one_line) {
    if (ch == '\n') ch = ' ';
  }
  std::fprintf(stderr, "error: code=%s message=%s\n", code.c_str(), one_line.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seven-mode Kerr cavity hexagons: sweeps, steady states, noise spectra, Fock-space checks"};
  app.require_subcommand(1);
  Flags f;
  auto* hyst = app.add_subcommand("hysteresis", "forward and backward drive sweeps");
  auto* steady = app.add_subcommand("steady", "hexagon steady state at one drive");
  auto* spec = app.add_subcommand("spectrum", "quadrature noise spectra at one drive");
  auto* best = app.add_subcommand("best-squeeze", "optimal zero-frequency squeezing along the hexagon branch");
  auto* oracle = app.add_subcommand("oracle", "truncated Fock-space conservation checks");
  for (auto* c : {hyst, steady, spec, best, oracle}) add_flags(c, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("usage", e.what());
    return 2;
  }

  try {
    const RunConfig cfg = build_config(f);
    if (*hyst) return run_hysteresis(cfg);
    if (*steady) return run_steady(cfg);
    if (*spec) return run_spectrum(cfg);
    if (*best) return run_best_squeeze(cfg, f.observable.has_value());
    return run_oracle(cfg);
  } catch (const Error& e) {
    print_error(std::string(to_string(e.code())), e.what());
    return e.code() == ErrorCode::Config ? 2 : 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
}

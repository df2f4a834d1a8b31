#pragma once

// Classical seven-mode dynamics: right-hand side, fixed-step RK4,
// drive sweeps for the hysteresis cycle and hexagon characterization.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hexkerr/error.hpp"
#include "hexkerr/model.hpp"

namespace hexkerr {

/// Seven classical mode amplitudes; alpha[0] is the homogeneous mode.
struct ModeState {
  std::array<Complex, kModeCount> alpha{};

  [[nodiscard]] bool is_finite() const noexcept {
    for (const auto& a : alpha) {
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
    }
    return true;
  }

  [[nodiscard]] double max_abs() const noexcept {
    double m = 0.0;
    for (const auto& a : alpha) m = std::max(m, std::abs(a));
    return m;
  }

  /// Mean modulus of the six hexagonal modes.
  [[nodiscard]] double hex_magnitude() const noexcept {
    double s = 0.0;
    for (int j = 1; j < kModeCount; ++j) s += std::abs(alpha[j]);
    return s / kHexModeCount;
  }

  ModeState& operator+=(const ModeState& o) noexcept {
    for (int k = 0; k < kModeCount; ++k) alpha[k] += o.alpha[k];
    return *this;
  }
};

inline ModeState operator+(ModeState a, const ModeState& b) noexcept { return a += b; }
inline ModeState operator*(double s, ModeState a) noexcept {
  for (auto& x : a.alpha) x *= s;
  return a;
}

/// d(alpha)/d(gamma t) of the seven-mode classical equations.
///
/// The self-phase term of the homogeneous mode is read as i conj(a0) a0^2.
/// Hexagonal modes see the detuning delta + l_D^2 k_c^2, which is 2 for
/// parameters built at criticality.
inline ModeState rhs(const ModeState& state, const ModelParams& params) {
  const auto& a = state.alpha;
  const Complex a0 = a[0];
  const Complex a0c = std::conj(a0);
  const double n0 = std::norm(a0);

  double hex_power = 0.0;
  Complex pair_sum{};
  Complex triad_sum{};
  for (int j = 1; j <= 6; ++j) {
    hex_power += std::norm(a[j]);
    pair_sum += a[j] * a[hx(j, 3)];
    triad_sum += std::conj(a[j]) * a[hx(j, 1)] * a[hx(j, 5)];
  }

  ModeState d;
  d.alpha[0] = params.e_in - Complex{1.0, params.delta} * a0 + kI * n0 * a0 +
               2.0 * kI * a0 * hex_power + kI * a0c * pair_sum + 2.0 * kI * triad_sum;

  const Complex hex_linear{1.0, params.hex_detuning()};
  const Complex a0sq = a0 * a0;
  for (int j = 1; j <= 6; ++j) {
    const Complex aj = a[j];
    const Complex a1 = a[hx(j, 1)], a2 = a[hx(j, 2)], a3 = a[hx(j, 3)];
    const Complex a4 = a[hx(j, 4)], a5 = a[hx(j, 5)];
    const double nj = std::norm(aj);
    d.alpha[j] = -hex_linear * aj + kI * nj * aj + 2.0 * kI * aj * n0 +
                 2.0 * kI * aj * (hex_power - nj) + 2.0 * kI * std::conj(a3) * (a4 * a1 + a5 * a2) +
                 kI * a0sq * std::conj(a3) + 2.0 * kI * a0c * a5 * a1 +
                 2.0 * kI * a0 * (std::conj(a4) * a5 + a1 * std::conj(a2));
  }
  return d;
}

/// One classical RK4 step of size h (in units of 1/gamma). Returns the
/// maximum modulus of the right-hand side at the start of the step.
inline double rk4_step(ModeState& state, const ModelParams& params, double h) {
  const ModeState k1 = rhs(state, params);
  const ModeState k2 = rhs(state + (0.5 * h) * k1, params);
  const ModeState k3 = rhs(state + (0.5 * h) * k2, params);
  const ModeState k4 = rhs(state + h * k3, params);
  for (int k = 0; k < kModeCount; ++k) {
    state.alpha[k] += (h / 6.0) * (k1.alpha[k] + 2.0 * k2.alpha[k] + 2.0 * k3.alpha[k] + k4.alpha[k]);
  }
  return k1.max_abs();
}

inline void throw_divergence(double t) {
  std::ostringstream os;
  os << "divergence: non-finite state at gamma*t = " << t;
  throw Error(ErrorCode::Divergence, os.str());
}

/// Parameters as a function of time, for ramped drives.
using DriveSchedule = std::function<ModelParams(double)>;

struct TrajectoryPoint {
  double t;
  ModeState state;
};

struct IntegrationResult {
  ModeState state;
  std::vector<TrajectoryPoint> trajectory;  // empty unless recording was requested
};

/// Fixed-step RK4 evolution over `duration`. With a schedule the parameters
/// are re-evaluated at the start of every step. `record_every` > 0 stores
/// every n-th state, including the initial and final ones.
inline IntegrationResult integrate(const ModeState& state0, const ModelParams& params, double step,
                                   double duration, const DriveSchedule& schedule = {},
                                   int record_every = 0) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "integration step must be positive");
  if (!(duration >= step)) throw Error(ErrorCode::InvalidArgument, "duration must be at least one step");

  IntegrationResult out{state0, {}};
  const auto steps = static_cast<long long>(std::llround(duration / step));
  if (record_every > 0) out.trajectory.push_back({0.0, state0});
  for (long long n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * step;
    rk4_step(out.state, schedule ? schedule(t) : params, step);
    if (!out.state.is_finite()) throw_divergence(t + step);
    if (record_every > 0 && ((n + 1) % record_every == 0 || n + 1 == steps)) {
      out.trajectory.push_back({static_cast<double>(n + 1) * step, out.state});
    }
  }
  return out;
}

struct SteadyRun {
  ModeState state;
  bool converged = false;
  double time = 0.0;     // gamma*t at which the run stopped
  double residual = 0.0; // max |rhs| at the final state
};

/// Integrates until max|rhs| < tol for `window` consecutive steps, or until
/// `max_time` has elapsed. The residual, not the state change, is tested
/// because the translation family makes some phases drift freely.
inline SteadyRun run_to_steady(const ModeState& state0, const ModelParams& params, double step,
                               double max_time, double tol = 1e-9, int window = 100) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "integration step must be positive");
  SteadyRun run{state0};
  int quiet = 0;
  const auto max_steps = static_cast<long long>(std::llround(max_time / step));
  for (long long n = 0; n < max_steps; ++n) {
    const double r = rk4_step(run.state, params, step);
    run.time = static_cast<double>(n + 1) * step;
    if (!run.state.is_finite()) throw_divergence(run.time);
    quiet = r < tol ? quiet + 1 : 0;
    if (quiet >= window) {
      run.converged = true;
      break;
    }
  }
  run.residual = rhs(run.state, params).max_abs();
  return run;
}

// ---------------------------------------------------------------------------
// Seeding

/// Deterministic per-mode phases for the six hexagonal modes.
inline std::array<double, kHexModeCount> seed_phases(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 2.0 * std::numbers::pi);
  std::array<double, kHexModeCount> phases{};
  for (auto& p : phases) p = dist(rng);
  return phases;
}

/// Adds amplitude * exp(i phase_j) to each hexagonal mode.
inline void add_seed(ModeState& state, double amplitude, const std::array<double, kHexModeCount>& phases) {
  for (int j = 1; j <= 6; ++j) state.alpha[j] += std::polar(amplitude, phases[j - 1]);
}

/// Homogeneous state on the lowest branch for these parameters.
inline ModeState homogeneous_state(const ModelParams& params) {
  const auto roots = homogeneous_steady_states(params);
  ModeState s;
  s.alpha[0] = homogeneous_amplitude(params, roots.front());
  return s;
}

// ---------------------------------------------------------------------------
// Drive sweeps

enum class SweepDirection { Forward, Backward };

constexpr std::string_view to_string(SweepDirection d) noexcept {
  return d == SweepDirection::Forward ? "forward" : "backward";
}

/// Maps a drive intensity |E_in|^2 to model parameters.
using DriveFamily = std::function<ModelParams(double)>;

/// delta = |E_0s|^2 = |E_in|^2 along the whole sweep.
inline DriveFamily tied_detuning_family(double gamma = 1.0) {
  return [gamma](double intensity) { return ModelParams::tied(intensity, gamma); };
}

/// Fixed detuning with a real drive sqrt(intensity).
inline DriveFamily fixed_detuning_family(double delta, double gamma = 1.0) {
  return [delta, gamma](double intensity) {
    return ModelParams::at_criticality(delta, Complex{std::sqrt(std::max(intensity, 0.0)), 0.0}, gamma);
  };
}

struct SweepOptions {
  double low = 0.8;
  double high = 1.3;
  SweepDirection direction = SweepDirection::Forward;
  double ramp_rate = 5e-6;        // d|E_in|^2 / d(gamma t)
  double step = 2e-2;             // RK4 step in 1/gamma
  double sample_spacing = 2.5e-3; // drive spacing of recorded points
  std::uint64_t seed = 1;
  double seed_amplitude = 1e-6;   // re-added at every sample of a forward sweep
  double start_amplitude = 0.15;  // hexagon seed for the backward start
  double settle_time = 4000.0;    // max time to converge the backward start
};

struct SweepPoint {
  double e_in_sq;
  double beta_mag;
  double beta0_mag;
};

struct SweepResult {
  SweepDirection direction;
  std::vector<SweepPoint> points;
};

/// Slow linear ramp of |E_in|^2 across [low, high].
///
/// A forward sweep starts on the homogeneous branch and re-injects the seed
/// perturbation at every sample, since the noiseless equations would never
/// leave that branch. A backward sweep starts from the state reached by
/// settling a strongly seeded hexagon at `high`.
inline SweepResult sweep(const DriveFamily& family, const SweepOptions& opt) {
  if (!(opt.high > opt.low)) throw Error(ErrorCode::InvalidArgument, "sweep range must have high > low");
  if (!(opt.ramp_rate > 0.0) || !(opt.step > 0.0) || !(opt.sample_spacing > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "ramp rate, step and sample spacing must be positive");
  }
  const bool forward = opt.direction == SweepDirection::Forward;
  const auto phases = seed_phases(opt.seed);

  ModeState state;
  const double start = forward ? opt.low : opt.high;
  if (forward) {
    state = homogeneous_state(family(start));
    add_seed(state, opt.seed_amplitude, phases);
  } else {
    const ModelParams p = family(start);
    state = homogeneous_state(p);
    add_seed(state, opt.start_amplitude * std::sqrt(std::max(p.drive_intensity(), 1e-12)), phases);
    state = run_to_steady(state, p, opt.step, opt.settle_time).state;
  }

  SweepResult result{opt.direction, {}};
  auto record = [&](double drive) {
    result.points.push_back({drive, state.hex_magnitude(), std::abs(state.alpha[0])});
  };
  record(start);

  const auto samples = static_cast<int>(std::llround((opt.high - opt.low) / opt.sample_spacing));
  const double sign = forward ? 1.0 : -1.0;
  const double dt_segment = opt.sample_spacing / opt.ramp_rate;
  const auto steps = std::max<long long>(1, std::llround(dt_segment / opt.step));
  const double h = dt_segment / static_cast<double>(steps);
  double t = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double seg_start = start + sign * opt.sample_spacing * k;
    if (forward && k > 0) add_seed(state, opt.seed_amplitude, phases);
    for (long long n = 0; n < steps; ++n) {
      const double drive = seg_start + sign * opt.ramp_rate * (static_cast<double>(n) * h);
      rk4_step(state, family(drive), h);
      t += h;
      if (!state.is_finite()) throw_divergence(t);
    }
    record(start + sign * opt.sample_spacing * (k + 1));
  }
  return result;
}

/// First drive of a forward sweep at which |beta| exceeds `threshold`.
inline std::optional<double> jump_up_drive(const SweepResult& fwd, double threshold = 1e-2) {
  for (const auto& p : fwd.points) {
    if (p.beta_mag > threshold) return p.e_in_sq;
  }
  return std::nullopt;
}

/// Lowest drive of a backward sweep still on the hexagon branch
/// (|beta| > threshold), i.e. the last sample before the drop.
inline std::optional<double> drop_down_drive(const SweepResult& bwd, double threshold = 1e-2) {
  std::optional<double> last;
  for (const auto& p : bwd.points) {
    if (p.beta_mag > threshold) {
      last = p.e_in_sq;
    } else if (last) {
      break;
    }
  }
  return last;
}

// ---------------------------------------------------------------------------
// Hexagon characterization

/// Classical hexagon: beta_j = |beta| exp(i(phi + theta_j)) and
/// beta_{j(+)3} = |beta| exp(i(phi - theta_j)) for j = 1, 3, 5 with
/// theta_1 = dphi1/2, theta_3 = dphi3/2 and theta_5 = -theta_1 - theta_3.
/// dphi1, dphi3 are the free phase differences of the translation family.
struct HexSteadyState {
  Complex beta0{};
  double beta_mag = 0.0;
  double phi = 0.0;
  double dphi1 = 0.0;
  double dphi3 = 0.0;

  /// The common hexagonal amplitude |beta| e^{i phi} (exact in the
  /// dphi = 0 gauge).
  [[nodiscard]] Complex beta() const { return std::polar(beta_mag, phi); }
  [[nodiscard]] bool is_gauged(double tol = 1e-12) const {
    return std::abs(dphi1) <= tol && std::abs(dphi3) <= tol;
  }
};

/// Seven-mode state of a hexagon.
inline ModeState to_mode_state(const HexSteadyState& hex) {
  const std::array<double, 3> theta{0.5 * hex.dphi1, 0.5 * hex.dphi3, -0.5 * (hex.dphi1 + hex.dphi3)};
  ModeState s;
  s.alpha[0] = hex.beta0;
  for (int k = 0; k < 3; ++k) {
    const int j = 2 * k + 1;
    s.alpha[j] = std::polar(hex.beta_mag, hex.phi + theta[k]);
    s.alpha[hx(j, 3)] = std::polar(hex.beta_mag, hex.phi - theta[k]);
  }
  return s;
}

/// Rigid transverse translation by (dx, dy) in units of 1/k_c.
inline ModeState translate(const ModeState& state, double dx, double dy) {
  ModeState out = state;
  for (int j = 1; j <= 6; ++j) {
    const auto k = wave_vector(j);
    out.alpha[j] *= std::polar(1.0, k[0] * dx + k[1] * dy);
  }
  return out;
}

/// Checks the steady-state symmetries (equal intensities, equal phase sums of
/// symmetric pairs, vanishing sum of phase differences) and returns the
/// hexagon parameters. Angles are compared on wrapped differences.
inline HexSteadyState extract_hexagon(const ModeState& state, double tol) {
  const auto& a = state.alpha;
  HexSteadyState hex;
  hex.beta0 = a[0];
  const double mean = state.hex_magnitude();
  double worst = 0.0;
  int worst_mode = 1;
  for (int j = 1; j <= 6; ++j) {
    const double dev = std::abs(std::abs(a[j]) - mean);
    if (dev > worst) {
      worst = dev;
      worst_mode = j;
    }
  }
  auto fail = [](const std::string& what, double by) {
    std::ostringstream os;
    os << "hexagon symmetry violated: " << what << " (deviation " << by << ")";
    throw Error(ErrorCode::SymmetryViolation, os.str());
  };
  if (worst > tol) fail("intensity, mode " + std::to_string(worst_mode) + " differs from the mean modulus", worst);

  hex.beta_mag = mean;
  if (mean <= tol) return hex;  // homogeneous state: phases are meaningless

  std::array<double, 3> sums{};
  for (int j = 1; j <= 3; ++j) sums[j - 1] = std::arg(a[j] * a[hx(j, 3)]);
  const double s12 = std::abs(wrap_angle(sums[1] - sums[0]));
  const double s13 = std::abs(wrap_angle(sums[2] - sums[0]));
  if (std::max(s12, s13) > tol) fail("sumphases, symmetric-pair phase sums differ", std::max(s12, s13));

  const double diff_sum = wrap_angle(std::arg(a[1] * std::conj(a[4])) + std::arg(a[3] * std::conj(a[6])) +
                                     std::arg(a[5] * std::conj(a[2])));
  if (std::abs(diff_sum) > tol) fail("diffphases, phase differences do not sum to zero", std::abs(diff_sum));

  // phi is fixed by the pair sums only modulo pi; pick the branch for which
  // the half-differences theta_1 + theta_3 + theta_5 vanish modulo 2 pi.
  const double two_phi = std::arg(a[1] * a[4] + a[2] * a[5] + a[3] * a[6]);
  double phi = 0.5 * two_phi;
  auto thetas = [&](double ph) {
    std::array<double, 3> th{};
    for (int k = 0; k < 3; ++k) th[k] = std::arg(a[2 * k + 1] * std::polar(1.0, -ph));
    return th;
  };
  auto th = thetas(phi);
  if (std::abs(wrap_angle(th[0] + th[1] + th[2])) > 0.5 * std::numbers::pi) {
    phi = wrap_angle(phi + std::numbers::pi);
    th = thetas(phi);
  }
  hex.phi = wrap_angle(phi);
  hex.dphi1 = 2.0 * th[0];
  hex.dphi3 = 2.0 * th[1];
  return hex;
}

/// Moves the pattern by the rigid translation that zeroes both free phase
/// differences. beta0, |beta| and phi are unchanged.
inline HexSteadyState gauge_translate(const HexSteadyState& hex) {
  // k_1 . dx = -theta_1 and k_3 . dx = -theta_3.
  const double t1 = 0.5 * hex.dphi1;
  const double t3 = 0.5 * hex.dphi3;
  const auto k1 = wave_vector(1);
  const auto k3 = wave_vector(3);
  const double det = k1[0] * k3[1] - k1[1] * k3[0];
  const double dx = (-t1 * k3[1] + t3 * k1[1]) / det;
  const double dy = (-t3 * k1[0] + t1 * k3[0]) / det;
  const ModeState moved = translate(to_mode_state(hex), dx, dy);

  HexSteadyState out = hex;
  out.dphi1 = 0.0;
  out.dphi3 = 0.0;
  // The translated state is the fully symmetric one; take the common phase
  // from it so that rounding in the translation is not hidden.
  out.phi = wrap_angle(std::arg(moved.alpha[1] + moved.alpha[2] + moved.alpha[3] + moved.alpha[4] +
                                moved.alpha[5] + moved.alpha[6]));
  if (hex.beta_mag == 0.0) out.phi = hex.phi;
  return out;
}

}  // namespace hexkerr

#pragma once

// Seven-mode Kerr cavity model: shared types, the homogeneous steady state
// and the modulational-instability threshold.
//
// Units: time in 1/gamma, intensities scaled to the saturation photon number
// (the nonlinear coupling g is absorbed everywhere except in fock.hpp).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "hexkerr/error.hpp"

namespace hexkerr {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr int kModeCount = 7;
inline constexpr int kHexModeCount = 6;

/// Index of one of the seven modes: 0 is the homogeneous mode, 1..6 are the
/// hexagonal modes, ordered counter-clockwise with 60 degree spacing so that
/// mode j (+) 3 is the mode with opposite wave vector.
class ModeIndex {
 public:
  constexpr explicit ModeIndex(int value) : value_(value) {
    if (value < 0 || value >= kModeCount) {
      throw Error(ErrorCode::InvalidArgument, "mode index out of range 0..6");
    }
  }

  [[nodiscard]] constexpr int value() const noexcept { return value_; }
  [[nodiscard]] constexpr bool is_hexagonal() const noexcept { return value_ != 0; }

  /// Cyclic addition on the hexagonal labels; the result stays in 1..6.
  [[nodiscard]] constexpr ModeIndex operator+(int shift) const {
    if (!is_hexagonal()) {
      throw Error(ErrorCode::InvalidArgument, "cyclic addition needs a hexagonal mode (1..6)");
    }
    return ModeIndex(hex_add(value_, shift));
  }

  /// ((i + j - 1) mod 6) + 1, with the modulo taken non-negative.
  static constexpr int hex_add(int i, int j) noexcept {
    const int r = (i + j - 1) % kHexModeCount;
    return (r < 0 ? r + kHexModeCount : r) + 1;
  }

  friend constexpr bool operator==(ModeIndex, ModeIndex) = default;

 private:
  int value_;
};

/// Shorthand for ModeIndex::hex_add on raw labels; used in inner loops.
constexpr int hx(int i, int j) noexcept { return ModeIndex::hex_add(i, j); }

/// Unit transverse wave vector of hexagonal mode j (in units of k_c).
inline std::array<double, 2> wave_vector(int j) {
  if (j < 1 || j > kHexModeCount) {
    throw Error(ErrorCode::InvalidArgument, "wave vectors exist only for modes 1..6");
  }
  const double angle = (j - 1) * std::numbers::pi / 3.0;
  return {std::cos(angle), std::sin(angle)};
}

struct ModelParams {
  double gamma = 1.0;
  double delta = 1.0;   // detuning of the homogeneous mode
  Complex e_in{1.0, 0.0};
  double ld2kc2 = 1.0;  // l_D^2 k_c^2

  /// Parameters on the critical circle: ld2kc2 = 2 - delta, so every
  /// hexagonal mode sees the detuning 2.
  static ModelParams at_criticality(double delta, Complex e_in, double gamma = 1.0) {
    if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
    return ModelParams{gamma, delta, e_in, 2.0 - delta};
  }

  /// The operating condition delta = |E_0s|^2, for which the homogeneous
  /// solution equals the (real) drive: E_in = E_0s = sqrt(drive_intensity).
  static ModelParams tied(double drive_intensity, double gamma = 1.0) {
    if (!(drive_intensity >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "drive intensity must be non-negative");
    }
    return at_criticality(drive_intensity, Complex{std::sqrt(drive_intensity), 0.0}, gamma);
  }

  [[nodiscard]] double hex_detuning() const noexcept { return delta + ld2kc2; }
  [[nodiscard]] double drive_intensity() const noexcept { return std::norm(e_in); }
};

namespace detail {

inline double cubic_lhs(double x, double delta) {
  const double d = delta - x;
  return x * (1.0 + d * d);
}

// Newton polish of a root of x(1+(delta-x)^2) - target.
inline double polish_root(double x, double delta, double target) {
  for (int it = 0; it < 50; ++it) {
    const double d = delta - x;
    const double f = x * (1.0 + d * d) - target;
    const double df = 1.0 + d * d - 2.0 * x * d;
    if (df == 0.0) break;
    const double step = f / df;
    x -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

}  // namespace detail

/// All non-negative real intracavity intensities X with
/// |E_in|^2 = X [1 + (delta - X)^2], sorted ascending.
///
/// The cubic x^3 - 2 delta x^2 + (1 + delta^2) x - |E_in|^2 is solved in
/// trigonometric/Cardano form and each root is Newton-polished.
inline std::vector<double> homogeneous_steady_states(const ModelParams& params) {
  const double target = params.drive_intensity();
  const double delta = params.delta;
  // Depressed cubic t^3 + p t + q with x = t + 2 delta / 3.
  const double a2 = -2.0 * delta;
  const double a1 = 1.0 + delta * delta;
  const double a0 = -target;
  const double shift = -a2 / 3.0;
  const double p = a1 - a2 * a2 / 3.0;
  const double q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
  const double disc = q * q / 4.0 + p * p * p / 27.0;

  std::vector<double> raw;
  if (disc > 0.0) {
    const double s = std::sqrt(disc);
    raw.push_back(std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s) + shift);
  } else {
    // Three real roots (p < 0 here).
    const double r = std::sqrt(-p / 3.0);
    const double arg = std::clamp(-q / (2.0 * r * r * r), -1.0, 1.0);
    const double theta = std::acos(arg);
    for (int k = 0; k < 3; ++k) {
      raw.push_back(2.0 * r * std::cos((theta - 2.0 * std::numbers::pi * k) / 3.0) + shift);
    }
  }

  std::vector<double> roots;
  for (double x : raw) {
    x = detail::polish_root(x, delta, target);
    if (x < 0.0 && x > -1e-14) x = 0.0;
    if (x < 0.0) continue;
    const bool duplicate = std::any_of(roots.begin(), roots.end(), [&](double y) {
      return std::abs(x - y) <= 1e-10 * std::max(1.0, x);
    });
    if (!duplicate) roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

/// Complex homogeneous amplitude for intensity X: E_0s = E_in / (1 + i(delta - X)).
inline Complex homogeneous_amplitude(const ModelParams& params, double intensity) {
  return params.e_in / Complex{1.0, params.delta - intensity};
}

struct CriticalPoint {
  double threshold_intensity;  // |E_0s|^2 at onset
  double ld2kc2;               // critical l_D^2 k_c^2
};

inline CriticalPoint critical_point(double delta) {
  if (delta >= 2.0) {
    throw Error(ErrorCode::NoCriticalWavenumber,
                "no transverse critical wavenumber: l_D^2 k_c^2 = 2 - delta <= 0");
  }
  return {1.0, 2.0 - delta};
}

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::remainder(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

}  // namespace hexkerr

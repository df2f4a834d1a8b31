#pragma once

// Direct solution of the hexagonal steady state in the shifted, scaled real
// variables (u0, v0, u1, v1):
//   beta0 = E_0s (1 + u0 + i v0),   beta = E_0s / (2 sqrt 3) (u1 + i v1).

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "hexkerr/dynamics.hpp"
#include "hexkerr/error.hpp"
#include "hexkerr/model.hpp"

namespace hexkerr {

struct RealVars {
  double u0 = 0.0;
  double v0 = 0.0;
  double u1 = 0.0;
  double v1 = 0.0;

  [[nodiscard]] Eigen::Vector4d to_vector() const { return {u0, v0, u1, v1}; }
  static RealVars from_vector(const Eigen::Vector4d& x) { return {x[0], x[1], x[2], x[3]}; }
};

enum class Branch { Homogeneous, Hexagon };

constexpr std::string_view to_string(Branch b) noexcept {
  return b == Branch::Homogeneous ? "homogeneous" : "hexagon";
}

struct SolverReport {
  RealVars vars;
  double residual_norm = 0.0;
  int iterations = 0;
  Branch branch = Branch::Homogeneous;
};

inline constexpr double kHexScale = 0.28867513459481287;  // 1 / (2 sqrt 3)

/// Four real steady-state residuals.
///
/// Obtained by setting every hexagonal amplitude to the common beta (the
/// dphi = 0 member of the translation family) in the classical equations,
/// substituting the (u, v) variables with a real E_0s, and dividing the
/// homogeneous equation by E_0s and the hexagonal one by E_0s / (2 sqrt 3).
/// The drive is E_in = E_0s (1 + i(delta - |E_0s|^2)), the homogeneous
/// solution for that intensity. Returned order: Re, Im of the homogeneous
/// equation, then Re, Im of the hexagonal one.
inline Eigen::Vector4d residual(const RealVars& x, double e0s_sq, double delta) {
  if (!(e0s_sq > 0.0)) throw Error(ErrorCode::InvalidArgument, "|E_0s|^2 must be positive");
  const double X = e0s_sq;
  const Complex w0{x.u0, x.v0};
  const Complex w1{x.u1, x.v1};
  const Complex b0 = 1.0 + w0;  // beta0 / E_0s
  const double n1 = std::norm(w1);
  const double s = kHexScale;

  // Homogeneous mode, divided by E_0s.
  const Complex r0 = Complex{1.0, delta - X} - Complex{1.0, delta} * b0 +
                     kI * X * (std::norm(b0) * b0 + 12.0 * s * s * n1 * b0 +
                               6.0 * s * s * std::conj(b0) * w1 * w1 + 12.0 * s * s * s * n1 * w1);
  // Hexagonal mode, divided by E_0s / (2 sqrt 3).
  const Complex r1 = -Complex{1.0, 2.0} * w1 +
                     kI * X * (15.0 * s * s * n1 * w1 + 2.0 * std::norm(b0) * w1 + b0 * b0 * std::conj(w1) +
                               2.0 * s * std::conj(b0) * w1 * w1 + 4.0 * s * b0 * n1);
  return {r0.real(), r0.imag(), r1.real(), r1.imag()};
}

/// Jacobian of `residual` by central differences.
inline Eigen::Matrix4d residual_jacobian(const RealVars& x, double e0s_sq, double delta) {
  Eigen::Matrix4d jac;
  const Eigen::Vector4d v = x.to_vector();
  for (int k = 0; k < 4; ++k) {
    const double h = 1e-7 * std::max(1.0, std::abs(v[k]));
    Eigen::Vector4d plus = v, minus = v;
    plus[k] += h;
    minus[k] -= h;
    jac.col(k) = (residual(RealVars::from_vector(plus), e0s_sq, delta) -
                  residual(RealVars::from_vector(minus), e0s_sq, delta)) /
                 (2.0 * h);
  }
  return jac;
}

/// Damped Newton iteration: each step is halved (at most 20 times) until the
/// residual norm decreases.
inline SolverReport newton_solve(const RealVars& initial, double e0s_sq, double delta, double tol = 1e-13,
                                 int max_iter = 50) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  Eigen::Vector4d x = initial.to_vector();
  Eigen::Vector4d r = residual(initial, e0s_sq, delta);
  double norm = r.norm();
  int it = 0;
  while (norm >= tol) {
    if (it >= max_iter) {
      std::ostringstream os;
      os << "Newton did not converge in " << max_iter << " iterations (last residual " << norm << ")";
      throw Error(ErrorCode::NotConverged, os.str());
    }
    const Eigen::Matrix4d jac = residual_jacobian(RealVars::from_vector(x), e0s_sq, delta);
    const Eigen::FullPivLU<Eigen::Matrix4d> lu(jac);
    if (lu.rank() < 4) {
      throw Error(ErrorCode::SingularJacobian, "singular Jacobian; try a different initial guess");
    }
    const Eigen::Vector4d dx = lu.solve(-r);
    double scale = 1.0;
    Eigen::Vector4d trial = x + dx;
    Eigen::Vector4d rt = residual(RealVars::from_vector(trial), e0s_sq, delta);
    for (int halving = 0; halving < 20 && !(rt.norm() < norm); ++halving) {
      scale *= 0.5;
      trial = x + scale * dx;
      rt = residual(RealVars::from_vector(trial), e0s_sq, delta);
    }
    ++it;
    if (!(rt.norm() < norm)) {
      std::ostringstream os;
      os << "Newton stalled after " << it << " iterations (residual " << norm << ")";
      throw Error(ErrorCode::NotConverged, os.str());
    }
    x = trial;
    r = rt;
    norm = rt.norm();
  }
  SolverReport rep;
  rep.vars = RealVars::from_vector(x);
  rep.residual_norm = norm;
  rep.iterations = it;
  rep.branch = std::hypot(x[2], x[3]) > 1e-8 ? Branch::Hexagon : Branch::Homogeneous;
  return rep;
}

struct Amplitudes {
  Complex beta0;
  Complex beta;
};

inline Amplitudes to_amplitudes(const RealVars& x, Complex e0s) {
  return {e0s * Complex{1.0 + x.u0, x.v0}, e0s * kHexScale * Complex{x.u1, x.v1}};
}

/// Inverse of to_amplitudes for a real positive E_0s.
inline RealVars from_amplitudes(Complex beta0, Complex beta, double e0s) {
  const Complex w0 = beta0 / e0s - 1.0;
  const Complex w1 = beta / (e0s * kHexScale);
  return {w0.real(), w0.imag(), w1.real(), w1.imag()};
}

/// Phase of the growing hexagonal perturbation of the homogeneous state
/// (all beta_j equal), from the linearization dp = -p + (2 - X) q,
/// dq = (3X - 2) p - q. Equals pi/4 at threshold.
inline double instability_direction(double e0s_sq) {
  const double a = 2.0 - e0s_sq;
  const double b = 3.0 * e0s_sq - 2.0;
  if (a <= 0.0 || b <= 0.0) return 0.25 * std::numbers::pi;
  return std::atan2(std::sqrt(b), std::sqrt(a));
}

/// Newton search for the hexagon root, seeded along the instability
/// direction with |(u1, v1)| = 0.5; on failure (or convergence to the
/// homogeneous root) retries with the seed phase rotated by pi, pi/2, -pi/2.
inline SolverReport find_hexagon(double e0s_sq, double delta, double tol = 1e-13, int max_iter = 60) {
  const double base = instability_direction(e0s_sq);
  constexpr std::array<double, 4> rotations{0.0, std::numbers::pi, 0.5 * std::numbers::pi,
                                            -0.5 * std::numbers::pi};
  std::string last_error = "converged to the homogeneous root";
  for (const double rot : rotations) {
    const RealVars guess{0.0, 0.0, 0.5 * std::cos(base + rot), 0.5 * std::sin(base + rot)};
    try {
      const SolverReport rep = newton_solve(guess, e0s_sq, delta, tol, max_iter);
      if (rep.branch == Branch::Hexagon) return rep;
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  throw Error(ErrorCode::NoHexagon, "no hexagon root found at |E_0s|^2 = " + std::to_string(e0s_sq) +
                                        ": " + last_error);
}

}  // namespace hexkerr

#pragma once

// Linearized quantum fluctuations around a gauged hexagon (all beta_j equal
// to beta = |beta| e^{i phi}). Drift matrices are in units of gamma and act
// on (da_0..da_6, da_0^+..da_6^+).

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "hexkerr/dynamics.hpp"
#include "hexkerr/error.hpp"
#include "hexkerr/model.hpp"

namespace hexkerr {

using Matrix14c = Eigen::Matrix<Complex, 14, 14>;
using Vector7c = Eigen::Matrix<Complex, 7, 1>;
using Vector14c = Eigen::Matrix<Complex, 14, 1>;

struct FullLinearSystem {
  Matrix14c drift = Matrix14c::Zero();
  double gamma = 1.0;

  /// Input noise prefactor sqrt(2 gamma).
  [[nodiscard]] double noise_scale() const { return std::sqrt(2.0 * gamma); }
};

enum class Observable { W, Q, X };

constexpr std::string_view to_string(Observable o) noexcept {
  switch (o) {
    case Observable::W: return "W";
    case Observable::Q: return "Q";
    case Observable::X: return "X";
  }
  return "?";
}

/// Closed 2x2 system for the quadrature pair (Z(0), Z(pi/2)) of one mode
/// combination.
struct ReducedLinearSystem {
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();  // units of gamma
  Eigen::Matrix2cd c_in = vacuum_input_correlation();
  Observable label = Observable::W;
  int index = 0;  // i for Q(i), X(i); 0 for W

  static Eigen::Matrix2cd vacuum_input_correlation() {
    Eigen::Matrix2cd c;
    c << Complex{1.0, 0.0}, kI, -kI, Complex{1.0, 0.0};
    return c;
  }

  [[nodiscard]] std::string name() const {
    return index == 0 ? std::string(to_string(label)) : std::string(to_string(label)) + "(" + std::to_string(index) + ")";
  }
};

inline void require_gauged(const HexSteadyState& hex) {
  if (!hex.is_gauged(1e-9)) {
    throw Error(ErrorCode::NotGauged, "hexagon must be in the dphi1 = dphi3 = 0 gauge (apply gauge_translate)");
  }
}

/// Full linearized drift around a gauged hexagon.
///
/// Row 0 carries detuning delta; hexagonal rows carry detuning 2. Entry
/// (0, j^+) is 2i beta0 beta + 2i beta^2: the linearization of the triad sum
/// in the homogeneous equation contributes 2i beta^2, matching entry (j, 0^+).
inline FullLinearSystem build_full(const HexSteadyState& hex, double delta, double gamma = 1.0) {
  require_gauged(hex);
  const Complex b0 = hex.beta0;
  const Complex b = hex.beta();
  const Complex b0c = std::conj(b0), bc = std::conj(b);
  const double n0 = std::norm(b0), n = std::norm(b);

  // P acts on da, Q on da^+ (rows: d/dt da_m).
  Eigen::Matrix<Complex, 7, 7> P = Eigen::Matrix<Complex, 7, 7>::Zero();
  Eigen::Matrix<Complex, 7, 7> Q = Eigen::Matrix<Complex, 7, 7>::Zero();

  const Complex cross = 2.0 * kI * b0 * bc + 2.0 * kI * b0c * b + 4.0 * kI * n;
  P(0, 0) = -1.0 - kI * delta + 2.0 * kI * n0 + 12.0 * kI * n;
  Q(0, 0) = kI * b0 * b0 + 6.0 * kI * b * b;
  for (int j = 1; j <= 6; ++j) {
    P(0, j) = cross;
    Q(0, j) = 2.0 * kI * b0 * b + 2.0 * kI * b * b;
  }

  // Coefficients of da_{j(+)k} and da^+_{j(+)k} in row j, k = 0..5.
  const std::array<Complex, 6> d{
      -1.0 - 2.0 * kI + 2.0 * kI * n0 + 12.0 * kI * n, cross, 4.0 * kI * n, 2.0 * kI * n, 4.0 * kI * n, cross};
  const std::array<Complex, 6> e{kI * b * b,
                                 2.0 * kI * b * b,
                                 2.0 * kI * b0 * b + 2.0 * kI * b * b,
                                 kI * b0 * b0 + 6.0 * kI * b * b,
                                 2.0 * kI * b0 * b + 2.0 * kI * b * b,
                                 2.0 * kI * b * b};
  for (int j = 1; j <= 6; ++j) {
    P(j, 0) = cross;
    Q(j, 0) = 2.0 * kI * b0 * b + 2.0 * kI * b * b;
    for (int k = 0; k < 6; ++k) {
      P(j, hx(j, k)) += d[k];
      Q(j, hx(j, k)) += e[k];
    }
  }

  FullLinearSystem sys;
  sys.gamma = gamma;
  sys.drift.topLeftCorner<7, 7>() = P;
  sys.drift.topRightCorner<7, 7>() = Q;
  sys.drift.bottomLeftCorner<7, 7>() = Q.conjugate();
  sys.drift.bottomRightCorner<7, 7>() = P.conjugate();
  return sys;
}

/// Mode-combination coefficients v (v_0 = 0), so that c = sum_j v_j da_j.
inline Vector7c combination_vector(Observable label, int index = 1) {
  Vector7c v = Vector7c::Zero();
  switch (label) {
    case Observable::W: {
      const double s = 1.0 / std::sqrt(6.0);
      for (int j = 1; j <= 6; ++j) v[j] = (j % 2 == 1) ? s : -s;
      break;
    }
    case Observable::Q:
    case Observable::X: {
      if (index < 1 || index > 6) throw Error(ErrorCode::InvalidArgument, "combination index must be in 1..6");
      if (label == Observable::Q) {
        v[index] += 0.5;
        v[hx(index, 3)] += 0.5;
        v[hx(index, 1)] -= 0.5;
        v[hx(index, 4)] -= 0.5;
      } else {
        // Linearized N_- = N_i + N_{i+1} - N_{i+3} - N_{i+4}.
        v[index] += 0.5;
        v[hx(index, 1)] += 0.5;
        v[hx(index, 3)] -= 0.5;
        v[hx(index, 4)] -= 0.5;
      }
      break;
    }
  }
  return v;
}

/// M = [[Re A+, -Im A+], [Im A-, Re A-]] from A+ and A-.
inline Eigen::Matrix2d quadrature_drift(Complex a_plus, Complex a_minus) {
  Eigen::Matrix2d m;
  m << a_plus.real(), -a_plus.imag(), a_minus.imag(), a_minus.real();
  return m;
}

/// Sum of phase differences, W(theta) = (a1 - a4 + a3 - a6 + a5 - a2)/sqrt6 e^{-i theta} + h.c.
inline ReducedLinearSystem build_reduced_W(const HexSteadyState& hex) {
  require_gauged(hex);
  const Complex b0 = hex.beta0, b = hex.beta();
  const Complex b0c = std::conj(b0), bc = std::conj(b);
  const double n0 = std::norm(b0), n = std::norm(b);
  const Complex diag = -1.0 - 2.0 * kI + 2.0 * kI * n0 + 10.0 * kI * n - 4.0 * kI * b0 * bc - 4.0 * kI * b0c * b;
  const Complex off = -4.0 * kI * b0c * bc + 5.0 * kI * bc * bc + kI * b0c * b0c;
  ReducedLinearSystem sys;
  sys.m = quadrature_drift(diag + off, diag - off);
  sys.label = Observable::W;
  sys.index = 0;
  return sys;
}

/// Difference of phase sums, Q(psi) = (a_i + a_{i+3} - a_{i+1} - a_{i+4})/2 e^{-i psi} + h.c.
inline ReducedLinearSystem build_reduced_Q(const HexSteadyState& hex, int index = 1) {
  require_gauged(hex);
  const Complex b0 = hex.beta0, b = hex.beta();
  const Complex b0c = std::conj(b0), bc = std::conj(b);
  const double n0 = std::norm(b0), n = std::norm(b);
  const Complex diag = -1.0 - 2.0 * kI + 2.0 * kI * n0 + 6.0 * kI * n - 2.0 * kI * b0 * bc - 2.0 * kI * b0c * b;
  const Complex off = 2.0 * kI * b0c * bc - 3.0 * kI * bc * bc - kI * b0c * b0c;
  ReducedLinearSystem sys;
  sys.m = quadrature_drift(diag + off, diag - off);
  sys.label = Observable::Q;
  sys.index = index;
  return sys;
}

/// Sum of intensity differences, X(psi) = (a_i + a_{i+1} - a_{i+3} - a_{i+4})/2 e^{-i psi} + h.c.
/// X(phi) is the linearized N_-.
inline ReducedLinearSystem build_reduced_X(const HexSteadyState& hex, int index = 1) {
  require_gauged(hex);
  const Complex b0 = hex.beta0, b = hex.beta();
  const Complex b0c = std::conj(b0), bc = std::conj(b);
  const double n0 = std::norm(b0), n = std::norm(b);
  const Complex diag = -1.0 - 2.0 * kI + 2.0 * kI * n0 + 10.0 * kI * n + 2.0 * kI * b0 * bc + 2.0 * kI * b0c * b;
  const Complex off = 2.0 * kI * b0c * bc + 5.0 * kI * bc * bc + kI * b0c * b0c;
  ReducedLinearSystem sys;
  sys.m = quadrature_drift(diag + off, diag - off);
  sys.label = Observable::X;
  sys.index = index;
  return sys;
}

inline ReducedLinearSystem build_reduced(const HexSteadyState& hex, Observable label, int index = 1) {
  switch (label) {
    case Observable::W: return build_reduced_W(hex);
    case Observable::Q: return build_reduced_Q(hex, index);
    case Observable::X: return build_reduced_X(hex, index);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown observable");
}

struct EmbedReport {
  double out_coupling = 0.0;  // largest drift component leaving span{c, c^+}
  double m_deviation = 0.0;   // max |M_projected - M_reduced|
  Eigen::Matrix2d m_projected = Eigen::Matrix2d::Zero();
};

/// Projects the full drift on the combination c = v . da: writes
/// dc/dt = lambda c + mu c^+ + (rest), and reports |rest| and the 2x2 drift
/// of (c + c^+, -i(c - c^+)) implied by lambda and mu.
inline EmbedReport embed_check(const FullLinearSystem& full, const Vector7c& v,
                               const Eigen::Matrix2d& reference = Eigen::Matrix2d::Zero()) {
  Vector14c lc = Vector14c::Zero();
  Vector14c lcd = Vector14c::Zero();
  lc.head<7>() = v;
  lcd.tail<7>() = v.conjugate();
  const Eigen::Matrix<Complex, 1, 14> row = lc.transpose() * full.drift;
  const double nc = lc.squaredNorm();
  const Complex lambda = (row * lc.conjugate())(0) / nc;
  const Complex mu = (row * lcd.conjugate())(0) / nc;
  const Eigen::Matrix<Complex, 1, 14> rest = row - lambda * lc.transpose() - mu * lcd.transpose();

  EmbedReport rep;
  rep.out_coupling = rest.cwiseAbs().maxCoeff();
  const Complex mu_c = std::conj(mu);
  rep.m_projected = quadrature_drift(lambda + mu_c, lambda - mu_c);
  rep.m_deviation = (rep.m_projected - reference).cwiseAbs().maxCoeff();
  return rep;
}

inline EmbedReport embed_check(const FullLinearSystem& full, const ReducedLinearSystem& reduced) {
  return embed_check(full, combination_vector(reduced.label, reduced.index == 0 ? 1 : reduced.index), reduced.m);
}

/// Largest real part among the eigenvalues of the full drift.
inline double max_growth_rate(const FullLinearSystem& full) {
  const Eigen::ComplexEigenSolver<Matrix14c> es(full.drift, false);
  return es.eigenvalues().real().maxCoeff();
}

}  // namespace hexkerr

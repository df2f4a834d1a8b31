#pragma once

// Output noise spectra of the reduced 2x2 quadrature systems. Frequencies are
// in units of gamma; shot noise is 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "hexkerr/error.hpp"
#include "hexkerr/fluctuations.hpp"
#include "hexkerr/model.hpp"

namespace hexkerr {

struct SpectrumPoint {
  double omega;
  double s;
};

namespace detail {

inline constexpr double kMarginalTol = 1e-10;
inline constexpr double kAlignTol = 1e-8;
inline constexpr double kImagTol = 1e-10;

inline double drift_scale(const Eigen::Matrix2d& m) { return std::max(1.0, m.cwiseAbs().maxCoeff()); }

inline Eigen::RowVector2d quadrature_row(double psi) { return {std::cos(psi), std::sin(psi)}; }

struct Modes {
  Eigen::Vector2cd lambda;
  Eigen::Matrix2cd right;  // columns r_k
  Eigen::Matrix2cd left;   // rows l_k, left * right = I
};

inline Modes modes_of(const Eigen::Matrix2d& m) {
  const Eigen::EigenSolver<Eigen::Matrix2d> es(m);
  Modes md;
  md.lambda = es.eigenvalues();
  md.right = es.eigenvectors();
  md.left = md.right.inverse();
  return md;
}

// Index of an eigenvalue with |lambda + i omega| below tolerance, if any.
inline std::optional<int> marginal_mode(const Modes& md, double omega, double scale) {
  for (int k = 0; k < 2; ++k) {
    if (std::abs(md.lambda[k] + kI * omega) < kMarginalTol * scale) return k;
  }
  return std::nullopt;
}

inline double checked_real(Complex s) {
  if (std::abs(s.imag()) > kImagTol * std::max(1.0, std::abs(s.real()))) {
    std::ostringstream os;
    os << "quadrature spectrum has imaginary residue " << s.imag();
    throw Error(ErrorCode::InconsistentResult, os.str());
  }
  return s.real();
}

}  // namespace detail

/// C_out(w) = [2(M + iw)^-1 + I] C_in [2(M - iw)^-1 + I]^T.
inline Eigen::Matrix2cd output_correlation(const ReducedLinearSystem& sys, double omega) {
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  const Eigen::Matrix2cd mc = sys.m.cast<Complex>();
  const Eigen::Matrix2cd plus = mc + kI * omega * id;
  const Eigen::Matrix2cd minus = mc - kI * omega * id;
  const double scale = detail::drift_scale(sys.m);
  const Eigen::JacobiSVD<Eigen::Matrix2cd> svd(plus);
  if (svd.singularValues().minCoeff() < detail::kMarginalTol * scale) {
    std::ostringstream os;
    os << "marginal mode: drift eigenvalue on the imaginary axis at omega = " << omega;
    throw Error(ErrorCode::MarginalMode, os.str());
  }
  const Eigen::Matrix2cd t_plus = 2.0 * plus.inverse() + id;
  const Eigen::Matrix2cd t_minus = 2.0 * minus.inverse() + id;
  return t_plus * sys.c_in * t_minus.transpose();
}

/// S(psi, w) = C11 cos^2 + C22 sin^2 + (C12 + C21) sin cos.
///
/// When a drift eigenvalue sits at -i w (a marginal mode, e.g. the
/// translation mode of the X system at w = 0) the spectrum is evaluated as
/// its limit: finite for the quadrature blind to that mode, +infinity for
/// every other angle.
inline double quadrature_spectrum(const ReducedLinearSystem& sys, double psi, double omega) {
  const Eigen::RowVector2d e = detail::quadrature_row(psi);
  const double scale = detail::drift_scale(sys.m);
  const detail::Modes md = detail::modes_of(sys.m);

  Eigen::RowVector2cd y;
  if (const auto marginal = detail::marginal_mode(md, omega, scale)) {
    y.setZero();
    for (int k = 0; k < 2; ++k) {
      const Complex overlap = e.cast<Complex>() * md.right.col(k);
      if (k == *marginal) {
        if (std::abs(overlap) * md.left.row(k).norm() > detail::kAlignTol) {
          return std::numeric_limits<double>::infinity();
        }
        continue;
      }
      const Complex t = 1.0 + 2.0 / (md.lambda[k] + kI * omega);
      y += overlap * t * md.left.row(k);
    }
  } else {
    const Eigen::Matrix2cd plus = sys.m.cast<Complex>() + kI * omega * Eigen::Matrix2cd::Identity();
    y = e.cast<Complex>() + 2.0 * (plus.transpose().partialPivLu().solve(e.transpose().cast<Complex>())).transpose();
  }
  // S = y C_in y^H for real M, since T(-w) = conj(T(w)).
  const Complex s = (y * sys.c_in * y.adjoint())(0, 0);
  return detail::checked_real(s);
}

inline std::vector<SpectrumPoint> spectrum(const ReducedLinearSystem& sys, double psi, std::span<const double> omegas) {
  std::vector<SpectrumPoint> out;
  out.reserve(omegas.size());
  for (const double w : omegas) out.push_back({w, quadrature_spectrum(sys, psi, w)});
  return out;
}

struct Squeezing {
  double psi_opt;  // in [0, pi)
  double s_min;
};

inline double to_half_turn(double psi) {
  psi = std::fmod(psi, std::numbers::pi);
  if (psi < 0.0) psi += std::numbers::pi;
  if (psi >= std::numbers::pi) psi -= std::numbers::pi;
  return psi;
}

/// Minimum of S(psi, w) over psi, from the eigen-decomposition of the
/// 2x2 quadratic form in (cos psi, sin psi). Degenerate forms return psi = 0.
inline Squeezing best_squeezing(const ReducedLinearSystem& sys, double omega) {
  const double scale = detail::drift_scale(sys.m);
  const detail::Modes md = detail::modes_of(sys.m);
  if (const auto marginal = detail::marginal_mode(md, omega, scale)) {
    const Eigen::Vector2cd r = md.right.col(*marginal);
    if (std::abs(md.lambda[1 - *marginal] + kI * omega) < detail::kMarginalTol * scale) {
      return {0.0, std::numeric_limits<double>::infinity()};
    }
    // Only the quadrature orthogonal to the marginal right eigenvector stays
    // finite. r is real up to a phase for a real eigenvalue.
    const Complex ph = std::abs(r[0]) > std::abs(r[1]) ? std::conj(r[0]) / std::abs(r[0])
                                                      : std::conj(r[1]) / std::abs(r[1]);
    const Eigen::Vector2d rr = (r * ph).real();
    const double psi = to_half_turn(std::atan2(rr[0], -rr[1]));
    return {psi, quadrature_spectrum(sys, psi, omega)};
  }

  const Eigen::Matrix2cd c = output_correlation(sys, omega);
  const double a = c(0, 0).real();
  const double d = c(1, 1).real();
  const double b = 0.5 * (c(0, 1) + c(1, 0)).real();
  const double half_gap = std::hypot(0.5 * (a - d), b);
  const double s_min = 0.5 * (a + d) - half_gap;
  if (half_gap <= 1e-12 * std::max(1.0, std::abs(a) + std::abs(d))) return {0.0, s_min};
  const double psi_max = 0.5 * std::atan2(2.0 * b, a - d);
  return {to_half_turn(psi_max + 0.5 * std::numbers::pi), s_min};
}

/// Noise spectrum of the output photon-number combination N_-:
/// V(w) = gamma <N_+> (1 - 4 gamma^2 / (w^2 + 4 gamma^2)).
inline double analytic_number_spectrum(double omega, double gamma, double n_plus_mean) {
  if (!(n_plus_mean >= 0.0)) throw Error(ErrorCode::InvalidArgument, "<N_+> must be non-negative");
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  const double g2 = 4.0 * gamma * gamma;
  return gamma * n_plus_mean * (1.0 - g2 / (omega * omega + g2));
}

struct AnalyticNumberSpectrum {
  double gamma = 1.0;
  double n_plus_mean = 0.0;

  [[nodiscard]] double operator()(double omega) const { return analytic_number_spectrum(omega, gamma, n_plus_mean); }
  /// Shape normalized to the high-frequency limit: w^2 / (w^2 + 4 gamma^2).
  [[nodiscard]] double normalized(double omega) const {
    return omega * omega / (omega * omega + 4.0 * gamma * gamma);
  }
};

/// Default grid: 0, 300 log-spaced points in [1e-3, 1], 99 linear points in (1, 100].
inline std::vector<double> frequency_grid(int log_points = 300, double lo = 1e-3, double knee = 1.0, double hi = 100.0,
                                          int lin_points = 99) {
  if (log_points < 2 || lin_points < 1 || !(lo > 0.0) || !(knee > lo) || !(hi > knee)) {
    throw Error(ErrorCode::InvalidArgument, "invalid frequency grid specification");
  }
  std::vector<double> w{0.0};
  const double l0 = std::log10(lo), l1 = std::log10(knee);
  for (int k = 0; k < log_points; ++k) w.push_back(std::pow(10.0, l0 + (l1 - l0) * k / (log_points - 1)));
  for (int k = 1; k <= lin_points; ++k) w.push_back(knee + (hi - knee) * k / lin_points);
  return w;
}

struct LorentzianFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double goodness = 0.0;  // coefficient of determination
};

namespace detail {

struct LinearPart {
  double a, b, ss;
};

inline LinearPart fit_linear_part(std::span<const SpectrumPoint> pts, double c) {
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(pts.size()), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    basis(i, 0) = 1.0;
    basis(i, 1) = -1.0 / (pts[k].omega * pts[k].omega + c);
    y[i] = pts[k].s;
  }
  const Eigen::Vector2d coef = basis.colPivHouseholderQr().solve(y);
  return {coef[0], coef[1], (basis * coef - y).squaredNorm()};
}

inline double sum_sq(std::span<const SpectrumPoint> pts, double a, double b, double c) {
  double ss = 0.0;
  for (const auto& p : pts) {
    const double r = a - b / (p.omega * p.omega + c) - p.s;
    ss += r * r;
  }
  return ss;
}

}  // namespace detail

/// Least-squares fit of S(w) = a - b / (w^2 + c): a log-scan over c with
/// (a, b) solved linearly, then Levenberg-Marquardt on (a, b, c).
inline LorentzianFit lorentzian_fit(std::span<const SpectrumPoint> pts) {
  if (pts.size() < 4) throw Error(ErrorCode::InvalidArgument, "Lorentzian fit needs at least 4 points");
  for (const auto& p : pts) {
    if (!std::isfinite(p.omega) || !std::isfinite(p.s)) {
      throw Error(ErrorCode::InvalidArgument, "Lorentzian fit needs finite data");
    }
  }

  double best_c = 1.0;
  detail::LinearPart best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  for (int k = 0; k <= 240; ++k) {
    const double c = std::pow(10.0, -6.0 + 12.0 * k / 240.0);
    const auto lp = detail::fit_linear_part(pts, c);
    if (lp.ss < best.ss) {
      best = lp;
      best_c = c;
    }
  }

  Eigen::Vector3d p{best.a, best.b, best_c};
  double ss = best.ss;
  double mu = 1e-3;
  for (int it = 0; it < 500 && ss > 0.0; ++it) {
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
    for (const auto& pt : pts) {
      const double den = pt.omega * pt.omega + p[2];
      const Eigen::Vector3d g{1.0, -1.0 / den, p[1] / (den * den)};
      const double r = p[0] - p[1] / den - pt.s;
      jtj += g * g.transpose();
      jtr += g * r;
    }
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::Matrix3d lhs = jtj;
      lhs.diagonal() += mu * jtj.diagonal().cwiseMax(1e-300);
      const Eigen::Vector3d step = lhs.ldlt().solve(-jtr);
      const Eigen::Vector3d trial = p + step;
      if (trial[2] > 0.0) {
        const double st = detail::sum_sq(pts, trial[0], trial[1], trial[2]);
        if (st < ss) {
          const bool tiny = step.cwiseAbs().maxCoeff() <= 1e-15 * std::max(1.0, p.cwiseAbs().maxCoeff());
          p = trial;
          ss = st;
          mu = std::max(mu * 0.3, 1e-12);
          improved = !tiny;
          break;
        }
      }
      mu *= 10.0;
    }
    if (!improved) break;
  }

  LorentzianFit fit{p[0], p[1], p[2], 0.0};
  double mean = 0.0;
  for (const auto& pt : pts) mean += pt.s;
  mean /= static_cast<double>(pts.size());
  double ss_tot = 0.0;
  for (const auto& pt : pts) ss_tot += (pt.s - mean) * (pt.s - mean);
  if (!(fit.c > 0.0)) {
    fit.goodness = 0.0;
  } else if (ss_tot == 0.0) {
    fit.goodness = ss == 0.0 ? 1.0 : 0.0;
  } else {
    fit.goodness = 1.0 - ss / ss_tot;
  }
  return fit;
}

}  // namespace hexkerr

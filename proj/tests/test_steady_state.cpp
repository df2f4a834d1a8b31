#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace hexkerr;
using testing_support::uniform;

namespace {

// The four hexagon equations expanded term by term.
Eigen::Vector4d expanded(const RealVars& x, double X, double D) {
  const double u0 = x.u0, v0 = x.v0, u1 = x.u1, v1 = x.v1;
  const double r3 = std::sqrt(3.0);
  const double c = 1.0 / (2.0 * r3);
  Eigen::Vector4d r;
  r[0] = -u0 + (D - X) * v0 -
         X * (2 * u0 * v0 + u1 * v1 + u0 * u0 * v0 + 0.5 * v0 * u1 * u1 + c * u1 * u1 * v1 + u0 * u1 * v1 +
              v0 * v0 * v0 + 1.5 * v0 * v1 * v1 + c * v1 * v1 * v1);
  r[1] = -v0 - (D - X) * u0 +
         X * (2 * u0 + 3 * u0 * u0 + 1.5 * u1 * u1 + v0 * v0 + 0.5 * v1 * v1 + u0 * u0 * u0 + 1.5 * u0 * u1 * u1 +
              c * u1 * u1 * u1 + u0 * v0 * v0 + 0.5 * u0 * v1 * v1 + v0 * u1 * v1 + c * u1 * v1 * v1);
  r[2] = -u1 + 2 * v1 -
         X * (v1 + 2 * u0 * v1 + 2 * v0 * u1 + 2 / r3 * u1 * v1 + 1 / r3 * v0 * u1 * u1 + 2 * u0 * v0 * u1 +
              u0 * u0 * v1 + 1.25 * u1 * u1 * v1 + 2 / r3 * u0 * u1 * v1 + 3 * v0 * v0 * v1 + r3 * v0 * v1 * v1 +
              1.25 * v1 * v1 * v1);
  r[3] = -v1 - 2 * u1 +
         X * (3 * u1 + 6 * u0 * u1 + r3 * u1 * u1 + 2 * v0 * v1 + 1 / r3 * v1 * v1 + 3 * u0 * u0 * u1 +
              r3 * u0 * u1 * u1 + 1.25 * u1 * u1 * u1 + 2 * u0 * v0 * v1 + 1 / r3 * u0 * v1 * v1 + v0 * v0 * u1 +
              2 / r3 * v0 * u1 * v1 + 1.25 * u1 * v1 * v1);
  return r;
}

RealVars random_vars(double s) { return {uniform(-s, s), uniform(-s, s), uniform(-s, s), uniform(-s, s)}; }

}  // namespace

TEST(Residual, VanishesAtHomogeneousRoot) {
  for (const double x : {0.3, 1.0, 1.7}) {
    EXPECT_EQ(residual(RealVars{}, x, x).norm(), 0.0);
  }
  // Also for delta != |E_0s|^2: the drive is built from the homogeneous solution.
  EXPECT_LT(residual(RealVars{}, 0.8, 1.5).norm(), 1e-15);
}

TEST(Residual, AgreesWithExpandedForm) {
  for (int trial = 0; trial < 100; ++trial) {
    const RealVars x = random_vars(1.0);
    const double X = uniform(0.2, 2.0);
    const double D = uniform(-1.0, 1.9);
    const Eigen::Vector4d a = residual(x, X, D);
    const Eigen::Vector4d b = expanded(x, X, D);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff())) << trial;
  }
}

TEST(Residual, SmallHexagonalPerturbationIsLinear) {
  const double X = 1.1, eps = 1e-6;
  const Eigen::Vector4d r = residual(RealVars{0, 0, eps, 0}, X, X);
  EXPECT_NEAR(r[2] / eps, -1.0, 1e-5);
  EXPECT_NEAR(r[3] / eps, 3.0 * X - 2.0, 1e-5);
  EXPECT_LT(std::abs(r[0]) + std::abs(r[1]), 1e-10);
  EXPECT_GT(r.norm(), 0.0);
}

TEST(Residual, MatchesClassicalRhs) {
  for (int trial = 0; trial < 50; ++trial) {
    const RealVars x = random_vars(0.6);
    const double X = uniform(0.3, 1.8);
    const double D = uniform(-0.5, 1.9);
    const double e = std::sqrt(X);
    const auto am = to_amplitudes(x, e);
    const ModelParams p = ModelParams::at_criticality(D, e * Complex{1.0, D - X});
    const HexSteadyState h{am.beta0, std::abs(am.beta), std::arg(am.beta), 0.0, 0.0};
    const ModeState d = rhs(to_mode_state(h), p);
    const Eigen::Vector4d r = residual(x, X, D);
    const Complex r0 = d.alpha[0] / e;
    const Complex r1 = d.alpha[1] / (e * kHexScale);
    EXPECT_NEAR(r0.real(), r[0], 1e-12);
    EXPECT_NEAR(r0.imag(), r[1], 1e-12);
    EXPECT_NEAR(r1.real(), r[2], 1e-12);
    EXPECT_NEAR(r1.imag(), r[3], 1e-12);
  }
}

TEST(Residual, RejectsNonPositiveIntensity) {
  EXPECT_THROW(residual(RealVars{}, 0.0, 1.0), Error);
}

TEST(Newton, ExactRootUnchanged) {
  const auto rep = newton_solve(RealVars{}, 1.1, 1.1);
  EXPECT_LE(rep.iterations, 2);
  EXPECT_EQ(rep.vars.u0, 0.0);
  EXPECT_EQ(rep.vars.u1, 0.0);
  EXPECT_EQ(rep.branch, Branch::Homogeneous);
}

TEST(Newton, ForcedFailure) {
  try {
    newton_solve(RealVars{30, -30, 40, 25}, 1.1, 1.1, 1e-13, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotConverged);
  }
  EXPECT_THROW(newton_solve(RealVars{}, 1.1, 1.1, 0.0), Error);
}

TEST(Newton, FindsHexagonAndReportsResidual) {
  const auto rep = find_hexagon(1.1, 1.1);
  EXPECT_EQ(rep.branch, Branch::Hexagon);
  EXPECT_LT(rep.residual_norm, 1e-13);
  const auto am = to_amplitudes(rep.vars, std::sqrt(1.1));
  EXPECT_NEAR(std::abs(am.beta), 0.12764, 1e-5);
  EXPECT_NEAR(am.beta0.real(), 0.94382, 1e-5);
  EXPECT_NEAR(am.beta0.imag(), -0.03664, 1e-5);
}

TEST(Newton, NoHexagonBelowFold) {
  try {
    find_hexagon(0.9, 0.9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoHexagon);
  }
}

TEST(Newton, SeededFromIntegrationMatches) {
  for (const double drive : {1.05, 1.2}) {
    const auto p = ModelParams::tied(drive);
    ModeState s = homogeneous_state(p);
    add_seed(s, 0.15, seed_phases(7));
    const auto run = run_to_steady(s, p, 2e-2, 20000.0);
    ASSERT_TRUE(run.converged);
    const auto hex = gauge_translate(extract_hexagon(run.state, 1e-6));
    const double e = std::sqrt(drive);
    const RealVars guess = from_amplitudes(hex.beta0, hex.beta(), e);
    EXPECT_LT(residual(guess, drive, drive).norm(), 1e-6);
    const auto rep = newton_solve(guess, drive, drive);
    const auto am = to_amplitudes(rep.vars, e);
    EXPECT_NEAR(std::abs(am.beta), hex.beta_mag, 1e-6);
    EXPECT_NEAR(std::abs(am.beta0), std::abs(hex.beta0), 1e-6);
    EXPECT_LT(std::abs(am.beta - hex.beta()), 1e-6);
    EXPECT_LT(std::abs(am.beta0 - hex.beta0), 1e-6);
  }
}

TEST(Amplitudes, Examples) {
  auto am = to_amplitudes(RealVars{}, 1.0);
  EXPECT_EQ(am.beta0, Complex(1.0));
  EXPECT_EQ(am.beta, Complex(0.0));
  am = to_amplitudes(RealVars{0, 0, 2 * std::sqrt(3.0), 0}, 1.0);
  EXPECT_NEAR(std::abs(am.beta - 1.0), 0.0, 1e-15);
  for (int trial = 0; trial < 50; ++trial) {
    const RealVars x = random_vars(2.0);
    const double e = uniform(0.1, 2.0);
    const auto a = to_amplitudes(x, e);
    const RealVars y = from_amplitudes(a.beta0, a.beta, e);
    EXPECT_NEAR(y.u0, x.u0, 1e-13);
    EXPECT_NEAR(y.v1, x.v1, 1e-13);
  }
}

TEST(InstabilityDirection, ThresholdValue) {
  EXPECT_NEAR(instability_direction(1.0), std::numbers::pi / 4, 1e-15);
  EXPECT_NEAR(instability_direction(5.0), std::numbers::pi / 4, 1e-15);
}

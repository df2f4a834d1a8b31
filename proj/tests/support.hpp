#pragma once

#include <random>

#include "hexkerr/hexkerr.hpp"

namespace testing_support {

using namespace hexkerr;

// Upper-branch hexagon in the dphi = 0 gauge. Above |E_in|^2 = 1 the
// default Newton seeds find the only hexagon root.
inline HexSteadyState hexagon_at(double drive) {
  return newton_hexagon(ModelParams::tied(drive), 1e-13).hex;
}

inline HexSteadyState passive() { return {Complex{}, 0.0, 0.0, 0.0, 0.0}; }

inline std::mt19937_64& rng() {
  static std::mt19937_64 r(20240611);
  return r;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

}  // namespace testing_support

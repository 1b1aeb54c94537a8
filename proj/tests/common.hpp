#pragma once
#include <doctest.h>

#include <random>

#include "stairlam/io.hpp"

namespace tst {

using namespace stairlam;

inline StairConfig ref_cfg() { return StairConfig{ProfileConfig{1, 4, 1}, 1.1, 1.2, 0.02}; }
inline const ParamPoint P0{1.5, 1.5, 0};
inline const ParamPoint P1{1.2, 1.8, 0.3};

inline ParamPoint random_point(std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(0, 1);
  return {1 + 1e-6 + (1 - 2e-6) * u(g), 1 + 1e-6 + (1 - 2e-6) * u(g), -1 + 1e-6 + (2 - 2e-6) * u(g)};
}

inline double rel(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); }

// certification of the reference configuration, done once
inline const Setup& ref_setup() {
  static const Setup s = certify_setup(ProfileConfig{1, 4, 1}, 1.2, 0.02);
  return s;
}

}  // namespace tst

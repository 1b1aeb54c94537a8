#pragma once
// Convex profile phi with curvature band (lambda, Lambda) and the target set K_f.

#include "stairlam/core.hpp"

namespace stairlam {

struct ProfileConfig {
  double lambda = 1.0;
  double Lambda = 4.0;
  double sharpness = 1.0;  //!< transition rate k of the curvature crossover

  void validate() const;
};

double phi_dd(const ProfileConfig& cfg, double a);
double phi_d(const ProfileConfig& cfg, double a);
double phi_d_inv(const ProfileConfig& cfg, double y);

//! ln cosh(x), overflow safe.
double log_cosh(double x);

SymMatrix2 kf_point(const ProfileConfig& cfg, double a, double b);
double kf_residual(const ProfileConfig& cfg, const SymMatrix2& X);

}  // namespace stairlam

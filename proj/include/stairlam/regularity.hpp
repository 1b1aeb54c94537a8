#pragma once
// Exponent bootstrap, pinching window for beta, and a discrete one-sided-bound convolution check.

#include <string>
#include <vector>

#include "stairlam/core.hpp"

namespace stairlam {

struct BootstrapInput {
  int n = 3;
  double p = 2;
  double gamma = 0.5;

  void validate() const;
  double p_star() const { return n * p / (n - p); }
};

struct BootstrapResult {
  std::vector<double> exponents;  //!< q_1, ..., ending exactly at p*
  int steps = 0;
};

BootstrapResult bootstrap_exponents(const BootstrapInput& inp);

struct PinchInput {
  int n = 2;
  double lambda = 0.9;
  double Lambda = 1;

  void validate() const;
};

struct PinchResult {
  bool ok = false;
  double lo = 0;
  double hi = 0;          //!< +inf when n = 1
  std::string failure;    //!< names the violated inequality when !ok
};

PinchResult pinching_beta(const PinchInput& inp);
//! (n-1) beta^2 - 2 n lambda beta + n Lambda^2
double pinching_quadratic(const PinchInput& inp, double beta);

//! Node values u(x0 + i h, y0 + j h), row-major in j.
struct GridFunction {
  int nx = 0, ny = 0;
  double h = 1, x0 = 0, y0 = 0;
  std::vector<double> u;

  double at(int i, int j) const { return u[static_cast<size_t>(j) * nx + i]; }
};

struct Lemma41Row {
  int i, j;
  double lhs, rhs, slack;
};

struct Lemma41Report {
  bool holds = true;
  double min_slack = 0;
  double max_slack = 0;
  std::vector<Lemma41Row> rows;
};

Lemma41Report discrete_lemma41(const GridFunction& g, std::array<int, 2> sigma, std::array<double, 2> L,
                               double eps);

//! Random function increasing in each coordinate, then reflected per sigma.
GridFunction random_monotone_sample(unsigned seed, int nodes, std::array<int, 2> sigma);

}  // namespace stairlam

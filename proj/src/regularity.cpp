#include "stairlam/regularity.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace stairlam {

void BootstrapInput::validate() const {
  if (n < 2) throw ConfigError("bootstrap needs n >= 2");
  if (!(p > 1 && p < n)) throw ConfigError("bootstrap needs 1 < p < n");
  if (!(gamma >= 0 && gamma < 1)) throw ConfigError("bootstrap needs 0 <= gamma < 1");
}

BootstrapResult bootstrap_exponents(const BootstrapInput& inp) {
  inp.validate();
  const double ps = inp.p_star();
  BootstrapResult r;
  if (inp.gamma == 0) {
    r.exponents = {ps};
    r.steps = 1;
    return r;
  }
  const double x = std::log(ps) / std::log(1 / inp.gamma);
  r.steps = std::max(1, static_cast<int>(std::ceil(x - 1e-12)));
  for (int k = 1; k < r.steps; ++k) r.exponents.push_back(std::pow(inp.gamma, -k));
  r.exponents.push_back(ps);
  return r;
}

void PinchInput::validate() const {
  if (n < 1) throw ConfigError("pinching needs n >= 1");
  if (!(lambda > 0) || !(Lambda >= lambda) || !std::isfinite(Lambda)) throw ConfigError("pinching needs 0 < lambda <= Lambda");
}

double pinching_quadratic(const PinchInput& inp, double beta) {
  return (inp.n - 1) * beta * beta - 2 * inp.n * inp.lambda * beta + inp.n * inp.Lambda * inp.Lambda;
}

PinchResult pinching_beta(const PinchInput& inp) {
  inp.validate();
  PinchResult r;
  const double n = inp.n, l = inp.lambda, L = inp.Lambda;
  if (inp.n == 1) {
    r.ok = true;
    r.lo = L * L / (2 * l);
    r.hi = std::numeric_limits<double>::infinity();
    return r;
  }
  const double lhs = L * L * (1 - 1 / n), rhs = l * l;
  const double D = n * n * l * l - n * (n - 1) * L * L;
  if (!(lhs < rhs) || !(D > 0)) {
    std::ostringstream os;
    os.precision(17);
    os << "pinching condition Lambda^2 (1 - 1/n) < lambda^2 violated: " << lhs << " >= " << rhs;
    r.failure = os.str();
    return r;
  }
  const double q = n * l + std::sqrt(D);
  r.ok = true;
  r.hi = q / (n - 1);
  r.lo = n * L * L / q;
  return r;
}

Lemma41Report discrete_lemma41(const GridFunction& g, std::array<int, 2> sigma, std::array<double, 2> L,
                               double eps) {
  if (g.nx < 3 || g.ny < 3 || g.u.size() != static_cast<size_t>(g.nx) * g.ny || !(g.h > 0))
    throw InputError("grid function needs at least 3x3 nodes and matching values");
  if (std::abs(sigma[0]) != 1 || std::abs(sigma[1]) != 1) throw InputError("signs must be +-1");
  const int mx = g.nx - 1, my = g.ny - 1;  // forward differences live on mx x my nodes
  std::vector<double> d0(static_cast<size_t>(mx) * my), d1(d0.size());
  std::ostringstream bad;
  int nbad = 0;
  for (int j = 0; j < my; ++j)
    for (int i = 0; i < mx; ++i) {
      const double a = (g.at(i + 1, j) - g.at(i, j)) / g.h, b = (g.at(i, j + 1) - g.at(i, j)) / g.h;
      d0[static_cast<size_t>(j) * mx + i] = a;
      d1[static_cast<size_t>(j) * mx + i] = b;
      const double tol = 1e-12 * std::max({1.0, std::fabs(a), std::fabs(b)});
      if (sigma[0] * a < L[0] - tol || sigma[1] * b < L[1] - tol) {
        if (nbad < 10) bad << " (" << i << "," << j << ")";
        ++nbad;
      }
    }
  if (nbad) throw InputError("one-sided bound fails at " + std::to_string(nbad) + " nodes:" + bad.str());

  const int R = static_cast<int>(std::floor(eps / g.h));
  if (R < 1 || 2 * R + 1 > std::min(mx, my)) throw InputError("mollifier radius must cover at least one cell and fit the grid");
  std::vector<double> w;
  double wsum = 0;
  for (int b = -R; b <= R; ++b)
    for (int a = -R; a <= R; ++a) {
      const double rr = (a * a + b * b) * g.h * g.h / (eps * eps);
      const double v = rr < 1 ? std::exp(-1 / (1 - rr)) : 0;
      w.push_back(v);
      wsum += v;
    }
  for (auto& v : w) v /= wsum;

  const double bound = 2 * std::sqrt(2.0) * std::hypot(L[0], L[1]);
  Lemma41Report rep;
  rep.min_slack = std::numeric_limits<double>::infinity();
  rep.max_slack = -std::numeric_limits<double>::infinity();
  for (int j = R; j < my - R; ++j)
    for (int i = R; i < mx - R; ++i) {
      double lhs = 0, m0 = 0, m1 = 0;
      size_t k = 0;
      for (int b = -R; b <= R; ++b)
        for (int a = -R; a <= R; ++a, ++k) {
          if (w[k] == 0) continue;
          const size_t idx = static_cast<size_t>(j + b) * mx + (i + a);
          lhs += w[k] * std::hypot(d0[idx], d1[idx]);
          m0 += w[k] * d0[idx];
          m1 += w[k] * d1[idx];
        }
      const double rhs = std::sqrt(2.0) * std::hypot(m0, m1) + bound;
      const double slack = rhs - lhs;
      rep.rows.push_back({i, j, lhs, rhs, slack});
      rep.min_slack = std::min(rep.min_slack, slack);
      rep.max_slack = std::max(rep.max_slack, slack);
      if (slack < -1e-12 * std::max(1.0, rhs)) rep.holds = false;
    }
  return rep;
}

GridFunction random_monotone_sample(unsigned seed, int nodes, std::array<int, 2> sigma) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0, 1);
  // increasing, nonnegative piecewise-linear profiles on a coarse knot set
  auto profile = [&](int knots) {
    std::vector<double> v{U(rng)};
    for (int k = 1; k <= knots; ++k) v.push_back(v.back() + 3 * std::pow(U(rng), 2));
    return v;
  };
  const int knots = 6;
  const auto A = profile(knots), B = profile(knots), C = profile(knots), D = profile(knots);
  const double mix = U(rng);
  auto ev = [&](const std::vector<double>& P, double t) {
    const double s = t * knots;
    const int k = std::min(knots - 1, static_cast<int>(s));
    return P[k] + (s - k) * (P[k + 1] - P[k]);
  };
  GridFunction g;
  g.nx = g.ny = nodes;
  g.h = 1.0 / (nodes - 1);
  g.u.resize(static_cast<size_t>(nodes) * nodes);
  for (int j = 0; j < nodes; ++j)
    for (int i = 0; i < nodes; ++i) {
      double x = i * g.h, y = j * g.h;
      if (sigma[0] < 0) x = 1 - x;
      if (sigma[1] < 0) y = 1 - y;
      g.u[static_cast<size_t>(j) * nodes + i] = ev(A, x) + ev(B, y) + mix * ev(C, x) * ev(D, y);
    }
  return g;
}

}  // namespace stairlam

#include "stairlam/profile.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace stairlam {

void ProfileConfig::validate() const {
  if (!(std::isfinite(lambda) && std::isfinite(Lambda) && std::isfinite(sharpness)))
    throw ConfigError("profile parameters must be finite");
  // lambda <= 1 <= Lambda keeps the unit curvature of the b-direction inside the band
  if (!(0 < lambda && lambda <= 1 && 1 <= Lambda && lambda < Lambda))
    throw ConfigError("profile requires 0 < lambda <= 1 <= Lambda with lambda < Lambda");
  if (!(sharpness > 0)) throw ConfigError("profile sharpness must be positive");
}

double log_cosh(double x) {
  x = std::fabs(x);
  // |x| - ln2 + log1p(e^{-2|x|}); the correction underflows to 0 for |x| > ~30.
  return x - std::numbers::ln2 + std::log1p(std::exp(-2 * x));
}

double phi_dd(const ProfileConfig& c, double a) {
  return c.lambda + (c.Lambda - c.lambda) * (1 - std::tanh(c.sharpness * a)) / 2;
}

double phi_d(const ProfileConfig& c, double a) {
  const double k = c.sharpness;
  return c.lambda * a + (c.Lambda - c.lambda) * (a - log_cosh(k * a) / k) / 2;
}

double phi_d_inv(const ProfileConfig& c, double y) {
  if (y == 0) return 0;
  double lo = y > 0 ? y / c.Lambda : y / c.lambda;
  double hi = y > 0 ? y / c.lambda : y / c.Lambda;
  const double tol = 1e-13 * std::fmax(1.0, std::fabs(y));
  double a = (lo + hi) / 2;
  for (int it = 0; it < 200; ++it) {
    const double f = phi_d(c, a) - y;
    if (std::fabs(f) <= tol) return a;
    if (f > 0)
      hi = a;
    else
      lo = a;
    double next = a - f / phi_dd(c, a);
    if (!(next > lo && next < hi)) next = (lo + hi) / 2;
    if (next == a || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::fabs(a)) {
      if (std::fabs(phi_d(c, next) - y) <= 1e-12 * std::fmax(1.0, std::fabs(y))) return next;
    }
    a = next;
  }
  if (std::fabs(phi_d(c, a) - y) <= 1e-12 * std::fmax(1.0, std::fabs(y))) return a;
  throw InternalError("phi_d_inv did not converge");
}

SymMatrix2 kf_point(const ProfileConfig& c, double a, double b) { return {a, b, -phi_d(c, a)}; }

double kf_residual(const ProfileConfig& c, const SymMatrix2& X) { return std::fabs(X.a22 + phi_d(c, X.a11)); }

}  // namespace stairlam

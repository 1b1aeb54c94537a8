#include "stairlam/staircase.hpp"

#include <cmath>
#include <map>

namespace stairlam {

void ParamPoint::validate() const {
  if (!in_box()) throw NotInImageError("parameter point outside the open box (1,2)x(1,2)x(-1,1)");
}

double p_critical(double lambda, double Lambda) {
  return 2 * std::sqrt(Lambda) / (std::sqrt(lambda) + std::sqrt(Lambda));
}

double limit_L(double lambda, double Lambda, double r) {
  const double sr = std::sqrt(r), g = std::sqrt(Lambda * lambda);
  const double q = (lambda * sr + g * r) / (lambda * sr + g);
  return q * q;
}

double log_r_L(double lambda, double Lambda, double r) {
  // log L / log r, with both logs formed by log1p to keep r near 1 accurate.
  const double sr = std::sqrt(r), g = std::sqrt(Lambda * lambda);
  const double lq = std::log1p(g * (r - 1) / (lambda * sr + g));
  return 2 * lq / std::log1p(r - 1);
}

void StairConfig::validate() const {
  profile.validate();
  if (!(r > 1 && r < 2)) throw ConfigError("r must lie in (1,2)");
  const double pc = p_critical(profile.lambda, profile.Lambda);
  if (!(p > 1 && p < pc)) throw ConfigError("p must lie in (1, p_crit)");
  if (!(delta > 0)) throw ConfigError("delta must be positive");
  if (!(p + 2 * delta < pc)) throw ConfigError("p + 2 delta must be below p_crit");
}

bool StairConfig::standing_assumption() const {
  return delta < (p_critical(profile.lambda, profile.Lambda) - p) / 10;
}

double StairConfig::c() const { return std::sqrt(profile.lambda / (r * profile.Lambda)); }

std::string to_string(Kind k) {
  switch (k) {
    case Kind::A: return "A";
    case Kind::B: return "B";
    case Kind::C: return "C";
    case Kind::D: return "D";
    case Kind::E: return "E";
    case Kind::W1: return "W1";
    case Kind::W2: return "W2";
    case Kind::V: return "V";
    case Kind::U1: return "U1";
    case Kind::U2: return "U2";
  }
  return "?";
}

Kind kind_from_string(const std::string& s) {
  static const std::map<std::string, Kind> m{{"A", Kind::A},   {"B", Kind::B},   {"C", Kind::C},  {"D", Kind::D},
                                             {"E", Kind::E},   {"W1", Kind::W1}, {"W2", Kind::W2}, {"V", Kind::V},
                                             {"U1", Kind::U1}, {"U2", Kind::U2}};
  auto it = m.find(s);
  if (it == m.end()) throw InputError("unknown matrix kind '" + s + "'");
  return it->second;
}

Blend Blend::from_t(double t) {
  if (!(t > 0 && t < 1)) throw ConfigError("t must lie in (0,1)");
  return Blend{std::log1p(-static_cast<long double>(t))};
}

double corr_split_weight(const Blend& t, const Blend& tp) {
  const long double ld = t.log_deficit, ldp = tp.log_deficit;
  if (!(ldp < ld)) throw ScheduleError("correction requires t < t'");
  const long double lw = ld + std::log(-std::expm1(ldp - ld)) - std::log(-std::expm1(ldp));
  return static_cast<double>(std::exp(lw));
}

double a_seq(const StairConfig& cfg, Sign sign, int k, const ParamPoint& P) {
  if (k < 1) throw ConfigError("sequence index must be >= 1");
  const double rk = std::pow(cfg.r, k);
  return sign == Sign::Plus ? P.a0p + rk : P.a0m + cfg.c() * rk;
}

namespace {

double ap(const StairConfig& c, int k, const ParamPoint& P) { return a_seq(c, Sign::Plus, k, P); }
double am(const StairConfig& c, int k, const ParamPoint& P) { return a_seq(c, Sign::Minus, k, P); }
double dphi(const StairConfig& c, double a) { return phi_d(c.profile, a); }

}  // namespace

SymMatrix2 family_matrix(const StairConfig& cfg, Kind kind, int i, const ParamPoint& P) {
  if (i < 1) throw ConfigError("family index must be >= 1");
  switch (kind) {
    case Kind::A:
    case Kind::V: return {ap(cfg, i, P), P.b, -dphi(cfg, -am(cfg, i, P))};
    case Kind::B:
    case Kind::U1: return {ap(cfg, i, P), P.b, -dphi(cfg, ap(cfg, i, P))};
    case Kind::C: return {ap(cfg, i, P), P.b, -dphi(cfg, -am(cfg, i + 1, P))};
    case Kind::D:
    case Kind::U2: {
      const double m = am(cfg, i + 1, P);
      return {-m, P.b, -dphi(cfg, -m)};
    }
    case Kind::E: return family_matrix(cfg, Kind::A, i + 1, P);
    default: throw ConfigError("family_matrix: kind " + to_string(kind) + " needs an interpolation parameter");
  }
}

Coeffs split_coeffs(const StairConfig& cfg, int i, const ParamPoint& P) {
  const double api = ap(cfg, i, P), api1 = ap(cfg, i + 1, P);
  const double ami = am(cfg, i, P), ami1 = am(cfg, i + 1, P);
  const double u = dphi(cfg, api), v = dphi(cfg, -ami), w = dphi(cfg, -ami1);
  const double den = u - w;
  const double f = (u - v) / den;
  const double s = ami1 + api1;
  return {(v - w) / den, f * (api1 - api) / s, f * (ami1 + api) / s};
}

SymMatrix2 interp_map(const StairConfig& cfg, int which, int i, const Blend& t, const ParamPoint& P) {
  const double d = t.deficit();
  if (which == 1) {
    const SymMatrix2 A = family_matrix(cfg, Kind::A, i, P), B = family_matrix(cfg, Kind::B, i, P);
    return {B.a11, B.a12, B.a22 + d * (A.a22 - B.a22)};
  }
  if (which == 2) {
    const SymMatrix2 A = family_matrix(cfg, Kind::A, i + 1, P), D = family_matrix(cfg, Kind::D, i, P);
    return {D.a11 + d * (A.a11 - D.a11), D.a12, D.a22};
  }
  throw ConfigError("interp_map: which must be 1 or 2");
}

SymMatrix2 interp_map(const StairConfig& cfg, int which, int i, double t, const ParamPoint& P) {
  return interp_map(cfg, which, i, Blend::from_t(t), P);
}

Coeffs interp_coeffs(const StairConfig& cfg, int i, const Blend& t, const ParamPoint& P) {
  const Coeffs c = split_coeffs(cfg, i, P);
  const double d = t.deficit();
  const double den = 1 - d * (1 - c.l1);
  return {c.l1 / den, c.l2 / den, (c.l3 - d * (c.l3 + c.l2)) / den};
}

Coeffs interp_coeffs(const StairConfig& cfg, int i, double t, const ParamPoint& P) {
  return interp_coeffs(cfg, i, Blend::from_t(t), P);
}

SymMatrix2 labeled_matrix(const StairConfig& cfg, Kind kind, int i, const std::optional<Blend>& t,
                          const ParamPoint& P) {
  if (kind == Kind::W1 || kind == Kind::W2) {
    if (!t) throw ConfigError("interpolation kind requires t");
    return interp_map(cfg, kind == Kind::W1 ? 1 : 2, i, *t, P);
  }
  return family_matrix(cfg, kind, i, P);
}

ParamPoint invert_family(const StairConfig& cfg, Kind kind, int i, const std::optional<Blend>& t,
                         const SymMatrix2& X) {
  if (i < 1) throw ConfigError("family index must be >= 1");
  const auto& pr = cfg.profile;
  const double c = cfg.c();
  ParamPoint P;
  P.b = X.a12;
  switch (kind) {
    case Kind::A:
    case Kind::V: {
      const double ri = std::pow(cfg.r, i);
      P.a0p = X.a11 - ri;
      P.a0m = -phi_d_inv(pr, -X.a22) - c * ri;
      break;
    }
    case Kind::W1: {
      if (!t) throw ConfigError("W1 inversion requires t");
      const double ri = std::pow(cfg.r, i);
      const double d = t->deficit(), tt = t->t();
      P.a0p = X.a11 - ri;
      const double y = (-X.a22 - tt * phi_d(pr, X.a11)) / d;
      P.a0m = -phi_d_inv(pr, y) - c * ri;
      break;
    }
    case Kind::W2: {
      if (!t) throw ConfigError("W2 inversion requires t");
      const double ri1 = std::pow(cfg.r, i + 1);
      const double d = t->deficit(), tt = t->t();
      const double amv = -phi_d_inv(pr, -X.a22);
      P.a0m = amv - c * ri1;
      P.a0p = (X.a11 + tt * amv) / d - ri1;
      break;
    }
    default: throw ConfigError("invert_family supports A, V, W1, W2");
  }
  if (!P.in_box() || !std::isfinite(P.a0p) || !std::isfinite(P.a0m))
    throw NotInImageError("matrix is not in the image of " + to_string(kind) + "_" + std::to_string(i));
  return P;
}

}  // namespace stairlam

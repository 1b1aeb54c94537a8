#include "stairlam/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stairlam {

namespace {

Interval rpow(double r, double k) {
  const double v = std::pow(r, k);
  return Interval::out(v, v);
}

Interval dphi(const ProfileConfig& pr, Interval x) {
  return monotone_up([&](double a) { return phi_d(pr, a); }, x);
}

struct Sets {
  Interval a11, a22;
};

double gap(Interval a, Interval b) { return std::max({0.0, a.lo - b.hi, b.lo - a.hi}); }

double box_distance(const Sets& a, const Sets& b) {
  const double g11 = gap(a.a11, b.a11), g22 = gap(a.a22, b.a22);
  return Interval::down(std::sqrt(g11 * g11 + g22 * g22));
}

// Coordinate boxes over the closed parameter box; D is the deficit range.
Sets box_A(const StairConfig& cfg, int k) {
  const Interval X = Interval(1, 2) + rpow(cfg.r, k);
  const Interval Y = Interval(1, 2) + Interval(cfg.c()) * rpow(cfg.r, k);
  return {X, -dphi(cfg.profile, -Y)};
}
Sets box_B(const StairConfig& cfg, int k) {
  const Interval X = Interval(1, 2) + rpow(cfg.r, k);
  return {X, -dphi(cfg.profile, X)};
}
Sets box_D(const StairConfig& cfg, int k) {
  const Interval Y = Interval(1, 2) + Interval(cfg.c()) * rpow(cfg.r, k + 1);
  return {-Y, -dphi(cfg.profile, -Y)};
}
Sets box_W1(const StairConfig& cfg, int k, Interval D) {
  const Interval X = Interval(1, 2) + rpow(cfg.r, k);
  const Interval Y = Interval(1, 2) + Interval(cfg.c()) * rpow(cfg.r, k);
  const Interval pu = dphi(cfg.profile, X), pv = dphi(cfg.profile, -Y);
  return {X, -((Interval(1) - D) * pu) + D * (-pv)};
}
Sets box_W2(const StairConfig& cfg, int k, Interval D) {
  const Interval X = Interval(1, 2) + rpow(cfg.r, k + 1);
  const Interval Y = Interval(1, 2) + Interval(cfg.c()) * rpow(cfg.r, k + 1);
  return {-((Interval(1) - D) * Y) + D * X, -dphi(cfg.profile, -Y)};
}

}  // namespace

std::pair<Interval, Interval> lambda13_enclosure(const StairConfig& cfg, int i, Interval X, Interval Y) {
  const auto& pr = cfg.profile;
  const Interval ri = rpow(cfg.r, i), ri1 = rpow(cfg.r, i + 1), c(cfg.c());
  const Interval api = X + ri, api1 = X + ri1;
  const Interval ami = Y + c * ri, ami1 = Y + c * ri1;
  const Interval u = dphi(pr, api), v = dphi(pr, -ami), w = dphi(pr, -ami1);
  // lambda1 = 1/(1 + (u-v)/(v-w)); both differences are positive.
  const Interval l1 = Interval(1) / (Interval(1) + (u - v) / (v - w));
  // lambda3 = (1 - lambda1)(1 - (r^{i+1} - r^i)/(a_{i+1}^- + a_{i+1}^+)).
  const Interval step = ri * Interval::out(cfg.r - 1, cfg.r - 1);
  const Interval l3 = (Interval(1) - l1) * (Interval(1) - step / (ami1 + api1));
  return {l1, l3};
}

Interval lambda3_enclosure(const StairConfig& cfg, int i, Interval X, Interval Y) {
  return lambda13_enclosure(cfg, i, X, Y).second;
}

bool certify_index(const StairConfig& cfg, int i, double dmax, long budget, BracketMargin& out) {
  const Interval lower = rpow(cfg.r, -2.0), upper = rpow(cfg.r, -(cfg.p + 2 * cfg.delta));
  struct Box {
    Interval X, Y;
  };
  std::vector<Box> stack{{Interval(1, 2), Interval(1, 2)}};
  out = BracketMargin{i, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0};
  while (!stack.empty()) {
    const Box b = stack.back();
    stack.pop_back();
    if (++out.boxes > budget) return false;
    auto [l1, l3] = lambda13_enclosure(cfg, i, b.X, b.Y);
    Interval v = l3;
    if (dmax > 0) {
      // lambda3_t = (lambda3 - beta)/(1 - beta), beta = d(1 - lambda1), decreasing in beta
      const Interval beta = Interval(0, dmax) * (Interval(1) - l1);
      const Interval bh(beta.hi);
      v = Interval((((Interval(l3.lo) - bh) / (Interval(1) - bh))).lo, l3.hi);
    }
    const double ls = v.lo - lower.hi, us = upper.lo - v.hi;
    if (ls > 0 && us > 0) {
      out.lower_slack = std::min(out.lower_slack, ls);
      out.upper_slack = std::min(out.upper_slack, us);
      continue;
    }
    if (v.hi <= lower.lo || v.lo >= upper.hi) return false;  // the whole box is outside
    if (b.X.width() < 1e-7 && b.Y.width() < 1e-7) return false;
    const double mx = b.X.mid(), my = b.Y.mid();
    stack.push_back({{b.X.lo, mx}, {b.Y.lo, my}});
    stack.push_back({{b.X.lo, mx}, {my, b.Y.hi}});
    stack.push_back({{mx, b.X.hi}, {b.Y.lo, my}});
    stack.push_back({{mx, b.X.hi}, {my, b.Y.hi}});
  }
  return true;
}

namespace {

bool quick_reject(const StairConfig& cfg, int i, double dmax) {
  const double lo = std::pow(cfg.r, -2.0), hi = std::pow(cfg.r, -(cfg.p + 2 * cfg.delta));
  for (double x : {1.0, 1.5, 2.0})
    for (double y : {1.0, 1.5, 2.0}) {
      // the closure corners are fine for a quick screen; b does not enter lambda3
      const ParamPoint P{x, y, 0};
      const Coeffs c = split_coeffs(cfg, i, P);
      double l3 = c.l3;
      if (dmax > 0) {
        const double beta = dmax * (1 - c.l1);
        l3 = (c.l3 - beta) / (1 - beta);
      }
      if (!(l3 > lo && c.l3 < hi)) return true;
    }
  return false;
}

}  // namespace

RSelection select_r_I0(const ProfileConfig& profile, double p, double delta, const CertifyOptions& opt) {
  profile.validate();
  const double pc = p_critical(profile.lambda, profile.Lambda);
  const double target = p + 2 * delta;
  if (!(p > 1 && delta > 0 && target < pc)) throw ConfigError("need 1 < p and p + 2 delta < p_crit");
  if (!(opt.r_cap > 1 && opt.r_cap < 2)) throw ConfigError("r cap must lie in (1,2)");
  const double m = (pc - target) / 4;
  auto h = [&](double r) { return log_r_L(profile.lambda, profile.Lambda, r) - target; };

  RSelection sel;
  if (h(opt.r_cap) >= m) {
    sel.r = opt.r_cap;
  } else {
    double lo = 1 + 1e-6, hi = opt.r_cap;
    if (h(lo) < m) throw BudgetError("no admissible r found near 1");
    for (int it = 0; it < 100; ++it) {
      const double mid = (lo + hi) / 2;
      (h(mid) >= m ? lo : hi) = mid;
    }
    sel.r = lo;
  }
  sel.log_r_L = log_r_L(profile.lambda, profile.Lambda, sel.r);
  if (!(sel.log_r_L < 2 && sel.log_r_L > target)) throw InternalError("selected r violates the limit bracket");

  StairConfig cfg{profile, sel.r, p, delta};
  int run_start = -1;
  std::vector<BracketMargin> run;
  for (int i = 1; i <= opt.max_index; ++i) {
    BracketMargin bm;
    const bool ok = !quick_reject(cfg, i, 0) && certify_index(cfg, i, 0, opt.box_budget, bm);
    if (!ok) {
      run_start = -1;
      run.clear();
      continue;
    }
    if (run_start < 0) run_start = i;
    run.push_back(bm);
    if (static_cast<int>(run.size()) == opt.horizon + 1) {
      sel.I0 = run_start;
      sel.margins = run;
      sel.worst_lower = sel.worst_upper = std::numeric_limits<double>::infinity();
      for (const auto& b : run) {
        sel.worst_lower = std::min(sel.worst_lower, b.lower_slack);
        sel.worst_upper = std::min(sel.worst_upper, b.upper_slack);
      }
      return sel;
    }
  }
  throw BudgetError("bracket certification did not succeed for indices up to " + std::to_string(opt.max_index) +
                    (run_start > 0 ? "; best run starts at " + std::to_string(run_start) : ""));
}

T0Selection select_T0_I1(const StairConfig& cfg, int I0, const CertifyOptions& opt) {
  T0Selection s;
  s.I1 = std::max(3, I0);
  for (int k = 1; k <= 60; ++k) {
    const double dmax = std::ldexp(1.0, -k);
    bool ok = true;
    double wl = std::numeric_limits<double>::infinity(), wu = wl;
    for (int i = s.I1; i <= s.I1 + opt.horizon && ok; ++i) {
      BracketMargin bm;
      ok = !quick_reject(cfg, i, dmax) && certify_index(cfg, i, dmax, opt.box_budget, bm);
      wl = std::min(wl, bm.lower_slack);
      wu = std::min(wu, bm.upper_slack);
    }
    if (ok) {
      s.T0 = 1 - dmax;
      s.worst_lower = wl;
      s.worst_upper = wu;
      return s;
    }
  }
  throw BudgetError("no T0 certified for the interpolated coefficients");
}

int min_I_power(double r, double delta) {
  const long double lr = std::log1p(static_cast<long double>(r) - 1);
  const long double need = -std::log(std::expm1(2 * static_cast<long double>(delta) * lr));
  int I = static_cast<int>(std::ceil(need / lr));
  if (I < 0) I = 0;
  while (I * lr < need * (1 + 1e-15L)) ++I;
  return I;
}

namespace {

bool distance_certificate(const StairConfig& cfg, int I, double dmax, int J, DistanceCertificate& dc) {
  const double lam = cfg.profile.lambda, Lam = cfg.profile.Lambda, c = cfg.c();
  // envelope monotonicity in the index, needed for the tail
  if (!((1 - dmax) * lam > dmax * Lam * c * (1 + 1e-12))) return false;
  if (!(dmax * (1 + 1e-12) < (1 - dmax) * c)) return false;
  const Interval D(0, dmax);
  dc = DistanceCertificate{};
  dc.cutoff = J;
  double pmin = std::numeric_limits<double>::infinity();
  std::vector<Sets> V, W1, W2;
  for (int k = I; k <= I + J + 1; ++k) {
    V.push_back(box_A(cfg, k));
    W1.push_back(box_W1(cfg, k, D));
    W2.push_back(box_W2(cfg, k, D));
  }
  for (int a = 0; a <= J; ++a)
    for (int b = 0; b <= J; ++b) pmin = std::min({pmin, box_distance(V[a], W1[b]), box_distance(V[a], W2[b])});
  const int T = J + 1;
  dc.pairwise_min = pmin;
  dc.tail_v_w1 = std::min(gap(V[T].a22, W1[0].a22), gap(V[0].a22, W1[T].a22));
  dc.tail_v_w2 = std::min(gap(V[T].a11, W2[0].a11), gap(V[0].a11, W2[T].a11));
  // the tail gaps must be oriented the right way, not just nonzero
  if (!(V[0].a22.lo > W1[0].a22.hi && V[0].a11.lo > W2[0].a11.hi)) return false;
  dc.v_a22_floor = V[0].a22.lo;
  dc.value = std::min({pmin, dc.tail_v_w1, dc.tail_v_w2});
  return dc.value > 1;
}

}  // namespace

ISelection select_I_T0prime(const StairConfig& cfg, double T0, int I1, const CertifyOptions& opt) {
  ISelection s;
  s.I_min_power = min_I_power(cfg.r, cfg.delta);
  const int start = std::max(I1, s.I_min_power);
  for (int I = start; I <= start + 500; ++I) {
    for (int k = 0; k <= 60; ++k) {
      const double dmax = std::min(1 - T0, std::ldexp(1.0, -k));
      DistanceCertificate dc;
      if (distance_certificate(cfg, I, dmax, opt.distance_cutoff, dc)) {
        s.I = I;
        s.T0prime = 1 - dmax;
        s.distance = dc;
        return s;
      }
    }
  }
  throw BudgetError("distance certificate not achieved");
}

Envelope envelope_check(const StairConfig& cfg, Kind label, int l, double T0) {
  const Interval D(0, 1 - T0);
  Sets s;
  switch (label) {
    case Kind::U1:
    case Kind::B: s = box_B(cfg, l); break;
    case Kind::U2:
    case Kind::D: s = box_D(cfg, l); break;
    case Kind::V:
    case Kind::A: s = box_A(cfg, l); break;
    case Kind::W1: s = box_W1(cfg, l, D); break;
    case Kind::W2: s = box_W2(cfg, l, D); break;
    default: throw ConfigError("envelope_check: unsupported label");
  }
  auto amax = [](Interval v) { return std::max(std::fabs(v.lo), std::fabs(v.hi)); };
  const double val = Interval::up(std::pow(amax(s.a11), cfg.p)) + Interval::up(std::pow(amax(s.a22), cfg.p));
  Envelope e;
  e.C = Interval::up(Interval::up(val) / Interval::down(std::pow(cfg.r, cfg.p * l))) * (1 + 1e-12);
  e.offdiag_ok = true;  // every family carries b in (-1,1) off the diagonal
  return e;
}

double envelope_constant(const StairConfig& cfg, double T0, int lo, int hi) {
  double C = 1;
  for (int l = lo; l <= hi; ++l)
    for (Kind k : {Kind::U1, Kind::U2, Kind::V, Kind::W1, Kind::W2}) C = std::max(C, envelope_check(cfg, k, l, T0).C);
  return C;
}

}  // namespace stairlam

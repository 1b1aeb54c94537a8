#include "stairlam/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stairlam {

namespace {

using ld = long double;

ld lnr(double r) { return std::log1p(static_cast<ld>(r) - 1); }

// Slack for a log-space comparison between quantities of the given magnitude.
ld slack(ld a, ld b) { return 1e-13L * (std::fabs(a) + std::fabs(b)) + 1e-300L; }

ld crp_term(double r, double p, int j) { return j * std::exp(-static_cast<ld>(p) * (j - 1) * lnr(r)); }

}  // namespace

CrpResult compute_Crp(double r, double p) {
  if (!(r > 1 && p >= 1)) throw ConfigError("compute_Crp needs r > 1 and p >= 1");
  const ld jstar = 1 / (static_cast<ld>(p) * lnr(r));
  std::vector<int> cand{1};
  const ld fl = std::floor(jstar);
  if (fl >= 1 && fl < 1e9) {
    cand.push_back(static_cast<int>(fl));
    cand.push_back(static_cast<int>(fl) + 1);
  }
  std::sort(cand.begin(), cand.end());
  CrpResult res{0, 0};
  ld best = -1;
  for (int j : cand) {
    const ld v = crp_term(r, p, j);
    if (v > best * (1 + 1e-15L)) {  // ties resolve to the smaller j
      best = v;
      res.argmax = j;
    }
  }
  // neighbours never exceed the maximiser (x r^{-p(x-1)} is unimodal in x)
  for (int j : {res.argmax - 1, res.argmax + 1})
    if (j >= 1 && crp_term(r, p, j) > best * (1 + 1e-15L)) throw InternalError("Crp maximiser check failed");
  res.Crp = Interval::up(static_cast<double>(best));
  return res;
}

double delta_seq(double delta, int l) {
  if (l < 1) throw ConfigError("delta_seq needs l >= 1");
  return (1 + 1.0 / (static_cast<double>(l) * l)) * delta;
}

double compute_Ctilde(double r, double p, double delta) {
  const ld L = lnr(r);
  auto term = [&](int l) {
    const ld e = std::min(static_cast<ld>(p) + delta_seq(delta, l + 1), static_cast<ld>(p) + delta_seq(delta, l));
    return static_cast<ld>(l + 1) * (l + 1) * std::exp(-e * (l + 1) * L);
  };
  ld best = 0;
  const ld turn = 2 / (static_cast<ld>(p) * L);  // (x)^2 r^{-p x} decreases beyond this
  for (int l = 1;; ++l) {
    best = std::max(best, term(l));
    const ld x = l + 1;
    if (x > turn && x * x * std::exp(-static_cast<ld>(p) * x * L) < best) break;
    if (l > 100000000) throw InternalError("Ctilde search did not terminate");
  }
  return Interval::up(static_cast<double>(std::max<ld>(1, best)) * (1 + 1e-12));
}

TDeficit t_seq(const ScheduleConstants& k, int l) {
  if (l < 1) throw ConfigError("t_seq needs l >= 1");
  const ld x = l + 1;
  const ld e = static_cast<ld>(k.N) + k.I + 2 * static_cast<ld>(k.p) * x * x * x;
  return TDeficit{-e * lnr(k.r) - std::log(x), l};
}

namespace {

ld easy_threshold(const ScheduleConstants& k) {
  return std::log1p(-static_cast<ld>(std::max({0.9, k.T0, k.T0prime})));
}

}  // namespace

int choose_N(const ScheduleConstants& partial) {
  ScheduleConstants k = partial;
  const ld bound = std::log(2 * static_cast<ld>(k.Ctilde) * k.Crp) / lnr(k.r);
  k.N = std::max(0, static_cast<int>(std::ceil(bound - 1e-12L)));
  while (k.N < bound) ++k.N;
  while (t_seq(k, 1).log_deficit > easy_threshold(k)) ++k.N;
  return k.N;
}

ScheduleReport verify_schedule(const ScheduleConstants& k, int l_max, const LogDeficitFn& sched) {
  ScheduleReport rep;
  rep.l_max = l_max;
  const ld L = lnr(k.r);
  auto ldef = [&](int l) { return sched ? sched(l) : t_seq(k, l).log_deficit; };
  auto fail = [&](std::string what, int l, int j, ld m) {
    rep.ok = false;
    rep.violations.push_back({std::move(what), l, j, m});
  };

  rep.margin_N = k.N - std::log(2 * static_cast<ld>(k.Ctilde) * k.Crp) / L;
  if (!(rep.margin_N >= 0)) fail("NBound", 0, 0, rep.margin_N);
  rep.margin_I = k.I * L + std::log(std::expm1(2 * static_cast<ld>(k.delta) * L));
  if (!(rep.margin_I >= 0)) fail("IPower", 0, 0, rep.margin_I);

  rep.margin_easy = easy_threshold(k) - ldef(1);
  if (!(rep.margin_easy > slack(easy_threshold(k), ldef(1)))) fail("Easy", 1, 0, rep.margin_easy);

  rep.min_margin_seq = rep.min_margin_difficult = std::numeric_limits<ld>::infinity();
  for (int l = 1; l <= l_max + 1; ++l) {
    const ld rhs = -(static_cast<ld>(k.I) + 2 * l) * L, lhs = ldef(l);
    const ld m = rhs - lhs;
    rep.min_margin_seq = std::min(rep.min_margin_seq, m);
    if (!(m > slack(rhs, lhs))) fail("SeqLowerBound", l, 0, m);
  }
  const ld lcrp = std::log(2 * static_cast<ld>(k.Crp));
  for (int l = 1; l <= l_max; ++l) {
    const ld a = ldef(l), b = ldef(l + 1);
    if (!(b < a)) {
      fail("Monotone", l, 0, a - b);
      continue;
    }
    // ln(2 C (t_{l+1} - t_l)) with t_{l+1} - t_l = e^{a} (1 - e^{b-a})
    const ld lhs = lcrp + a + std::log(-std::expm1(b - a));
    const ld dl = delta_seq(k.delta, l), dl1 = delta_seq(k.delta, l + 1);
    for (int j = 1; j <= l + 1; ++j) {
      // ln(r^{-(p+d_{l+1}) j} - r^{-(p+d_l) j})
      const ld rhs = -(static_cast<ld>(k.p) + dl1) * j * L + std::log(-std::expm1(-(dl - dl1) * j * L));
      const ld m = rhs - lhs;
      rep.min_margin_difficult = std::min(rep.min_margin_difficult, m);
      if (!(m > slack(rhs, lhs))) fail("Difficult", l, j, m);
    }
  }
  return rep;
}

Setup certify_setup(const ProfileConfig& profile, double p, double delta, const CertifyOptions& opt) {
  Setup s;
  s.rsel = select_r_I0(profile, p, delta, opt);
  s.cfg = StairConfig{profile, s.rsel.r, p, delta};
  s.cfg.validate();
  s.t0sel = select_T0_I1(s.cfg, s.rsel.I0, opt);
  s.isel = select_I_T0prime(s.cfg, s.t0sel.T0, s.t0sel.I1, opt);
  auto& k = s.sc;
  k.p = p;
  k.delta = delta;
  k.r = s.rsel.r;
  k.I0 = s.rsel.I0;
  k.I1 = s.t0sel.I1;
  k.T0 = s.t0sel.T0;
  k.T0prime = s.isel.T0prime;
  k.I = s.isel.I;
  const CrpResult crp = compute_Crp(k.r, p);
  k.Crp = crp.Crp;
  k.Crp_argmax = crp.argmax;
  k.Ctilde = compute_Ctilde(k.r, p, delta);
  k.N = choose_N(k);
  return s;
}

}  // namespace stairlam

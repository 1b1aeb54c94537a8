#include "stairlam/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace stairlam {

namespace {

// Neumaier compensated sum.
struct Sum {
  double s = 0, c = 0;
  void add(double x) {
    const double t = s + x;
    c += std::fabs(s) >= std::fabs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

int kind_rank(Kind k) { return k == Kind::W1 ? 0 : k == Kind::W2 ? 1 : 2; }

bool cell_less(const CellClass& a, const CellClass& b) {
  return std::make_tuple(kind_rank(a.kind), a.index, a.X.a11, a.X.a12, a.X.a22) <
         std::make_tuple(kind_rank(b.kind), b.index, b.X.a11, b.X.a12, b.X.a22);
}

double rel_scale(const SymMatrix2& X) { return std::fmax(1.0, X.max_abs()); }

}  // namespace

double CellEnsemble::total_mass() const {
  Sum s;
  for (const auto& c : cells) s.add(c.mass);
  return s.value();
}

long double Scheme::log_deficit(int l) const { return schedule ? schedule(l) : t_seq(setup.sc, l).log_deficit; }

CellEnsemble init(const Scheme& s, const ParamPoint& P0) {
  P0.validate();
  const int I = s.setup.sc.I;
  return CellEnsemble{0, {CellClass{Kind::V, I, family_matrix(s.setup.cfg, Kind::A, I, P0), P0, 1.0}}};
}

CellEnsemble step(const CellEnsemble& ens, const Scheme& s) {
  const auto& cfg = s.setup.cfg;
  const int I = s.setup.sc.I, l = ens.stage;
  const Blend tn = s.blend(l + 1);
  std::optional<Blend> to;
  if (l >= 1) {
    to = s.blend(l);
    if (!(tn.log_deficit < to->log_deficit)) throw ScheduleError("schedule is not increasing at stage " + std::to_string(l));
  }

  std::vector<CellClass> kids;
  for (const auto& cell : ens.cells) {
    // lineage consistency: the carried P must reproduce X
    const std::optional<Blend> tc = cell.kind == Kind::V ? std::nullopt : to;
    if (cell.kind != Kind::V && !tc) throw NotInImageError("corrupted state: W cell at stage 0");
    const SymMatrix2 expect = labeled_matrix(cfg, cell.kind, cell.index, tc, cell.P);
    if (max_entry_diff(expect, cell.X) > 1e-10 * rel_scale(cell.X))
      throw NotInImageError("corrupted state: cell matrix does not match its label");
    const ParamPoint P = cell.P;
    // inversion is well conditioned for V cells and for W cells with a visible deficit;
    // the lineage value is kept so that equal labels keep bit-equal matrices
    if (cell.kind == Kind::V || tc->deficit() > 1e-3) {
      const ParamPoint Q = invert_family(cfg, cell.kind, cell.index, tc, cell.X);
      const double tol = 1e-9 + 1e-13 * rel_scale(cell.X);
      if (std::fabs(Q.a0p - P.a0p) > tol || std::fabs(Q.a0m - P.a0m) > tol || Q.b != P.b)
        throw NotInImageError("corrupted state: recovered parameters disagree with the lineage");
    }
    Laminate lam;
    switch (cell.kind) {
      case Kind::V:
        if (cell.index != I + l) throw NotInImageError("corrupted state: V cell off its stage index");
        lam = build_mu_interp(cfg, cell.index, cell.index + 1, tn, P);
        break;
      case Kind::W1: lam = build_corr(cfg, 1, cell.index, I + l + 1, *to, tn, P); break;
      case Kind::W2: lam = build_corr(cfg, 2, cell.index, I + l + 1, *to, tn, P); break;
      default: throw NotInImageError("corrupted state: unexpected cell kind");
    }
    for (const auto& a : lam.atoms) {
      const double m = cell.mass * a.weight;
      if (!(m > 0)) continue;  // underflowed correction mass
      const Kind k = a.tag.kind == Kind::A ? Kind::V : a.tag.kind;
      kids.push_back(CellClass{k, a.tag.index, a.X, P, m});
    }
  }
  std::sort(kids.begin(), kids.end(), cell_less);
  CellEnsemble out{l + 1, {}};
  for (const auto& k : kids) {
    if (!out.cells.empty()) {
      auto& b = out.cells.back();
      if (b.kind == k.kind && b.index == k.index && coincide(b.X, k.X) && b.P == k.P) {
        b.mass += k.mass;
        continue;
      }
    }
    out.cells.push_back(k);
  }
  return out;
}

StageReport diagnostics(const CellEnsemble& ens, const Scheme& s) {
  const auto& cfg = s.setup.cfg;
  const auto& sc = s.setup.sc;
  const int l = ens.stage, I = sc.I;
  const double r = sc.r, p = sc.p;
  StageReport rep;
  rep.stage = l;
  rep.cells = ens.cells.size();
  rep.total_mass = ens.total_mass();
  if (std::fabs(rep.total_mass - 1) > 1e-12) rep.violations.push_back({"mass", l, 0});

  std::vector<Sum> band(std::max(l, 0));
  Sum vm, s1, sp, s2, en;
  std::map<int, double> hist;
  for (const auto& c : ens.cells) {
    const bool w = c.kind == Kind::W1 || c.kind == Kind::W2;
    const bool supported = w ? (c.index >= I && c.index < I + l) : (c.kind == Kind::V && c.index == I + l);
    if (!supported) {
      rep.violations.push_back({"support", l, c.index - I});
      continue;
    }
    if (w)
      band[c.index - I].add(c.mass);
    else
      vm.add(c.mass);
    const double x = std::fabs(c.X.a11), y = std::fabs(c.X.a22);
    s1.add(c.mass * (x + y));
    sp.add(c.mass * (std::pow(x, p) + std::pow(y, p)));
    s2.add(c.mass * (x * x + y * y));
    en.add(c.mass * x * x);
    if (w) {
      const double res = kf_residual(cfg.profile, c.X);
      rep.max_kf_residual = std::max(rep.max_kf_residual, res);
      const int bin = res > 0 ? static_cast<int>(std::floor(std::log10(res))) : -400;
      hist[bin] += c.mass;
    }
  }
  rep.S1 = s1.value();
  rep.Sp = sp.value();
  rep.S2 = s2.value();
  rep.energy = en.value();
  rep.kf_budget = std::ldexp(1.0, -l);
  rep.kf_within_budget = rep.max_kf_residual <= rep.kf_budget;
  rep.kf_histogram.assign(hist.begin(), hist.end());

  constexpr double tol = 1e-12;
  if (l >= 1) {
    const double dl = delta_seq(sc.delta, l);
    const long double ldl = s.log_deficit(l);
    const long double lt_l = std::log1p(-std::exp(ldl));
    for (int j = 0; j < l; ++j) {
      BandReport b;
      b.j = j;
      b.Q = band[j].value();
      const long double ratio = std::exp(std::log1p(-std::exp(s.log_deficit(j + 1))) - lt_l);
      b.lower = static_cast<double>((1 - std::pow(static_cast<long double>(r), -p)) *
                                    std::pow(static_cast<long double>(r), -2.0L * j) * ratio);
      b.upper = (1 - std::pow(r, -2.0)) * std::pow(r, -(p + dl) * j);
      if (b.Q < b.lower * (1 - tol)) rep.violations.push_back({"band-lower", l, j});
      if (b.Q > b.upper * (1 + tol)) rep.violations.push_back({"band-upper", l, j});
      rep.bands.push_back(b);
    }
    rep.V_mass = vm.value();
    rep.V_lower = std::pow(r, -2.0 * l);
    rep.V_upper = std::pow(r, -(p + dl) * l);
    if (rep.V_mass < rep.V_lower * (1 - tol)) rep.violations.push_back({"V-lower", l, l});
    if (rep.V_mass > rep.V_upper * (1 + tol)) rep.violations.push_back({"V-upper", l, l});
  } else {
    rep.V_mass = vm.value();
    rep.V_lower = rep.V_upper = 1;
  }
  return rep;
}

RunSummary summarize(const std::vector<StageReport>& st, const Scheme& s) {
  const auto& sc = s.setup.sc;
  RunSummary sum;
  const int L = static_cast<int>(st.size());  // stages 1..L
  for (const auto& r : st) {
    sum.bounds_ok = sum.bounds_ok && r.violations.empty();
    sum.Sp_max = std::max(sum.Sp_max, r.Sp);
    sum.S1_max = std::max(sum.S1_max, r.S1);
    sum.max_mass_error = std::max(sum.max_mass_error, std::fabs(r.total_mass - 1));
  }
  if (L >= 40) {
    sum.Sp_stage30 = st[29].Sp;
    for (int l = 31; l <= 40; ++l) sum.Sp_last10_max = std::max(sum.Sp_last10_max, st[l - 1].Sp);
    sum.Sp_rel_change = std::fabs(sum.Sp_last10_max - sum.Sp_stage30) / sum.Sp_stage30;
  }
  sum.envelope_C = envelope_constant(s.setup.cfg, sc.T0, sc.I, sc.I + L + 1);
  sum.Sp_envelope_bound = sum.envelope_C * std::pow(sc.r, sc.p * sc.I) / (1 - std::pow(sc.r, -sc.delta));
  for (const auto& r : st) sum.Sp_below_envelope = sum.Sp_below_envelope && r.Sp <= sum.Sp_envelope_bound;

  const double c = 0.9 * (1 - std::pow(sc.r, -sc.p)) * std::pow(sc.r, 2.0 * sc.I);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (int l = 1; l <= L; ++l) {
    const double e = st[l - 1].energy;
    if (l >= 2 && !(e > st[l - 2].energy)) sum.energy_increasing = false;
    if (l < 5) continue;
    if (e < c * l) sum.energy_above_linear = false;
    sx += l;
    sy += e;
    sxx += double(l) * l;
    sxy += l * e;
    syy += e * e;
    ++n;
  }
  if (n >= 2) {
    const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
    sum.energy_fit_slope = cxy / vx;
    sum.energy_fit_r2 = vy > 0 ? cxy * cxy / (vx * vy) : 1;
  }
  return sum;
}

RunResult run(const Scheme& s, const ParamPoint& P0, int L) {
  if (L < 1) throw ConfigError("run needs L >= 1");
  RunResult res;
  CellEnsemble e = init(s, P0);
  for (int l = 1; l <= L; ++l) {
    e = step(e, s);
    res.stages.push_back(diagnostics(e, s));
  }
  res.final = std::move(e);
  res.summary = summarize(res.stages, s);
  return res;
}

}  // namespace stairlam

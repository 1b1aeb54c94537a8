#include "stairlam/laminate.hpp"

#include <cmath>

namespace stairlam {

namespace {

double scale_of(const SymMatrix2& a) { return std::fmax(1.0, a.max_abs()); }

std::string split_problem(const SymMatrix2& atom, const SplitStep& st) {
  if (!(st.s >= 0 && st.s <= 1 && st.fraction >= 0 && st.fraction <= 1)) return "range";
  if (!st.B1.finite() || !st.B2.finite()) return "range";
  const RankOne ro = rank_one_decompose(st.B2 - st.B1);
  if (ro.second > 1e-10 * std::fabs(ro.kappa) + 1e-300) return "rank";
  const SymMatrix2 bc = st.B1 * (1 - st.s) + st.B2 * st.s;
  const double tol = 1e-10 * std::fmax(scale_of(atom), std::fmax(scale_of(st.B1), scale_of(st.B2)));
  if (max_entry_diff(bc, atom) > tol) return "barycenter";
  return "";
}

void add_atom(std::vector<Atom>& atoms, const SymMatrix2& X, double w, const AtomTag& tag) {
  if (!(w > 0)) return;
  for (auto& a : atoms)
    if (coincide(a.X, X)) {
      a.weight += w;
      return;
    }
  atoms.push_back({w, X, tag});
}

}  // namespace

bool coincide(const SymMatrix2& a, const SymMatrix2& b) {
  const double scale = std::fmax(a.max_abs(), b.max_abs());
  return max_entry_diff(a, b) <= kMergeTol * std::fmax(1.0, 1e-3 * scale);
}

RankOne rank_one_decompose(const SymMatrix2& M) {
  const double tr2 = (M.a11 + M.a22) / 2;
  const double h = std::hypot((M.a11 - M.a22) / 2, M.a12);
  const double big = tr2 >= 0 ? tr2 + h : tr2 - h;  // larger magnitude eigenvalue
  RankOne ro;
  if (big == 0) return ro;
  const double det = M.a11 * M.a22 - M.a12 * M.a12;
  ro.kappa = big;
  ro.second = std::fabs(det / big);
  // eigenvector of big: rows of (M - big I) are orthogonal to it
  const double x1 = M.a12, y1 = big - M.a11;  // from row 1
  const double x2 = big - M.a22, y2 = M.a12;  // from row 2
  double nx, ny;
  if (std::hypot(x1, y1) >= std::hypot(x2, y2)) {
    nx = x1;
    ny = y1;
  } else {
    nx = x2;
    ny = y2;
  }
  const double nn = std::hypot(nx, ny);
  ro.n = {nx / nn, ny / nn};
  return ro;
}

Laminate Laminate::dirac(const SymMatrix2& X, const AtomTag& tag) {
  Laminate l;
  l.root = Atom{1, X, tag};
  l.atoms = {l.root};
  return l;
}

double Laminate::total_weight() const {
  // Neumaier summation
  double s = 0, c = 0;
  for (const auto& a : atoms) {
    const double t = s + a.weight;
    c += std::fabs(s) >= std::fabs(a.weight) ? (s - t) + a.weight : (a.weight - t) + s;
    s = t;
  }
  return s + c;
}

int Laminate::find(const SymMatrix2& X) const {
  for (size_t k = 0; k < atoms.size(); ++k)
    if (coincide(atoms[k].X, X)) return static_cast<int>(k);
  return -1;
}

SymMatrix2 barycenter(const Laminate& nu) {
  SymMatrix2 b;
  for (const auto& a : nu.atoms) b = b + a.X * a.weight;
  return b;
}

void check_split(const SymMatrix2& atom, const SplitStep& step) {
  const std::string p = split_problem(atom, step);
  if (!p.empty()) throw InvalidSplitError(p + ": split step is not admissible");
}

Laminate elementary_split(const Laminate& nu, const SplitStep& step) {
  if (step.atom < 0 || step.atom >= static_cast<int>(nu.atoms.size()))
    throw InvalidSplitError("range: atom index out of bounds");
  const Atom src = nu.atoms[step.atom];
  check_split(src.X, step);
  if (step.fraction == 0) return nu;
  Laminate out = nu;
  const double wf = src.weight * step.fraction;
  const double w2 = wf * step.s, w1 = wf - w2, rem = src.weight - wf;
  out.atoms.erase(out.atoms.begin() + step.atom);
  if (rem > 0) out.atoms.insert(out.atoms.begin() + step.atom, Atom{rem, src.X, src.tag});
  add_atom(out.atoms, step.B1, w1, step.tag1);
  add_atom(out.atoms, step.B2, w2, step.tag2);
  out.certificate.push_back(step);
  return out;
}

namespace {

AtomTag tag(Kind k, int i, std::optional<long double> ld = std::nullopt) { return AtomTag{k, i, ld}; }

// Applies the splittings of mu^{(i,j)}_t to the atom A_i already present in lam.
void append_mu_steps(Laminate& lam, const StairConfig& cfg, int i, int j, const std::optional<Blend>& t,
                     const ParamPoint& P) {
  for (int k = i; k < j; ++k) {
    const SymMatrix2 Ak = family_matrix(cfg, Kind::A, k, P);
    const int ia = lam.find(Ak);
    if (ia < 0) throw InternalError("laminate constructor lost track of A_k");
    const SymMatrix2 Ck = family_matrix(cfg, Kind::C, k, P);
    Coeffs c;
    SplitStep s1, s2;
    if (t) {
      c = interp_coeffs(cfg, k, *t, P);
      s1 = {ia, interp_map(cfg, 1, k, *t, P), Ck, c.l2 + c.l3, 1, tag(Kind::W1, k, t->log_deficit), tag(Kind::C, k)};
    } else {
      c = split_coeffs(cfg, k, P);
      s1 = {ia, family_matrix(cfg, Kind::B, k, P), Ck, c.l2 + c.l3, 1, tag(Kind::B, k), tag(Kind::C, k)};
    }
    lam = elementary_split(lam, s1);
    const int ic = lam.find(Ck);
    if (ic < 0) throw InternalError("laminate constructor lost track of C_k");
    const SymMatrix2 next = family_matrix(cfg, Kind::A, k + 1, P);
    const double s = c.l3 / (c.l2 + c.l3);
    if (t)
      s2 = {ic, interp_map(cfg, 2, k, *t, P), next, s, 1, tag(Kind::W2, k, t->log_deficit), tag(Kind::A, k + 1)};
    else
      s2 = {ic, family_matrix(cfg, Kind::D, k, P), next, s, 1, tag(Kind::D, k), tag(Kind::A, k + 1)};
    lam = elementary_split(lam, s2);
  }
}

}  // namespace

Laminate build_mu_i(const StairConfig& cfg, int i, const ParamPoint& P) {
  Laminate lam = Laminate::dirac(family_matrix(cfg, Kind::A, i, P), tag(Kind::A, i));
  append_mu_steps(lam, cfg, i, i + 1, std::nullopt, P);
  return lam;
}

Laminate build_mu_interp(const StairConfig& cfg, int i, int j, const Blend& t, const ParamPoint& P) {
  if (!(i >= 1 && i < j)) throw ConfigError("build_mu_interp needs 1 <= i < j");
  Laminate lam = Laminate::dirac(family_matrix(cfg, Kind::A, i, P), tag(Kind::A, i));
  append_mu_steps(lam, cfg, i, j, t, P);
  return lam;
}

Laminate build_corr(const StairConfig& cfg, int which, int i, int j, const Blend& t, const Blend& tp,
                    const ParamPoint& P) {
  if (!(which == 1 || which == 2)) throw ConfigError("build_corr: which must be 1 or 2");
  if (!(i >= 1 && i < j)) throw ConfigError("build_corr needs 1 <= i < j");
  const Kind wk = which == 1 ? Kind::W1 : Kind::W2;
  const int next = which == 1 ? i : i + 1;
  Laminate lam = Laminate::dirac(interp_map(cfg, which, i, t, P), tag(wk, i, t.log_deficit));
  const double s = corr_split_weight(t, tp);
  const SplitStep st{0, interp_map(cfg, which, i, tp, P), family_matrix(cfg, Kind::A, next, P), s, 1,
                     tag(wk, i, tp.log_deficit), tag(Kind::A, next)};
  lam = elementary_split(lam, st);
  if (s > 0 && next < j) append_mu_steps(lam, cfg, next, j, tp, P);
  return lam;
}

ValidationReport validate(const Laminate& nu) {
  ValidationReport rep;
  auto fail = [&](std::string stage, std::string msg) {
    rep.ok = false;
    rep.stage = std::move(stage);
    rep.message = std::move(msg);
    return rep;
  };
  for (size_t k = 0; k < nu.atoms.size(); ++k) {
    const double w = nu.atoms[k].weight;
    if (!(w > 0 && w <= 1 + 1e-12)) return fail("simplex", "atom " + std::to_string(k) + " has weight outside (0,1]");
  }
  if (std::fabs(nu.total_weight() - 1) > 1e-12) return fail("simplex", "weights do not sum to 1");
  for (size_t a = 0; a < nu.atoms.size(); ++a)
    for (size_t b = a + 1; b < nu.atoms.size(); ++b)
      if (coincide(nu.atoms[a].X, nu.atoms[b].X))
        return fail("simplex", "atoms " + std::to_string(a) + " and " + std::to_string(b) + " coincide");

  Laminate replay = Laminate::dirac(nu.root.X, nu.root.tag);
  for (size_t k = 0; k < nu.certificate.size(); ++k) {
    const SplitStep& st = nu.certificate[k];
    if (st.atom < 0 || st.atom >= static_cast<int>(replay.atoms.size()))
      return fail("rank", "step " + std::to_string(k) + " refers to a missing atom");
    const std::string p = split_problem(replay.atoms[st.atom].X, st);
    if (!p.empty()) return fail(p == "range" ? "rank" : p, "step " + std::to_string(k) + " fails the " + p + " test");
    replay = elementary_split(replay, st);
  }
  if (replay.atoms.size() != nu.atoms.size()) return fail("reproduction", "replay yields a different atom count");
  for (size_t k = 0; k < nu.atoms.size(); ++k) {
    if (!coincide(replay.atoms[k].X, nu.atoms[k].X))
      return fail("reproduction", "atom " + std::to_string(k) + " differs from the replay");
    if (std::fabs(replay.atoms[k].weight - nu.atoms[k].weight) > 1e-12)
      return fail("reproduction", "weight of atom " + std::to_string(k) + " differs from the replay");
  }
  return rep;
}

}  // namespace stairlam

#include "stairlam/realizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace stairlam {

double polygon_area(const Polygon& P) {
  double a = 0;
  for (size_t k = 0, n = P.size(); k < n; ++k) {
    const Vec2 &p = P[k], &q = P[(k + 1) % n];
    a += p[0] * q[1] - p[1] * q[0];
  }
  return a / 2;
}

double polygon_diameter(const Polygon& P) {
  double d = 0;
  for (size_t a = 0; a < P.size(); ++a)
    for (size_t b = a + 1; b < P.size(); ++b) d = std::max(d, std::hypot(P[a][0] - P[b][0], P[a][1] - P[b][1]));
  return d;
}

Polygon clip(const Polygon& P, const Vec2& a, double b) {
  Polygon out;
  const size_t n = P.size();
  out.reserve(n + 1);
  for (size_t k = 0; k < n; ++k) {
    const Vec2 &p = P[k], &q = P[(k + 1) % n];
    const double fp = a[0] * p[0] + a[1] * p[1] - b, fq = a[0] * q[0] + a[1] * q[1] - b;
    if (fp <= 0) out.push_back(p);
    if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) {
      const double t = fp / (fp - fq);
      out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
    }
  }
  Polygon dedup;
  for (const auto& v : out)
    if (dedup.empty() || v != dedup.back()) dedup.push_back(v);
  while (dedup.size() > 1 && dedup.front() == dedup.back()) dedup.pop_back();
  if (dedup.size() < 3) return {};
  return dedup;
}

Polygon unit_square() { return {{0, 0}, {1, 0}, {1, 1}, {0, 1}}; }

namespace {

double frob(const Mat2& a, const Mat2& b) {
  double s = 0;
  for (int k = 0; k < 4; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

double mat_scale(const Mat2& a) {
  return std::max({1.0, std::fabs(a[0]), std::fabs(a[1]), std::fabs(a[2]), std::fabs(a[3])});
}

double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

// Affine scalar function g.x + gamma.
struct Aff {
  Vec2 g;
  double gamma;
};

AffineCell add_profile(const AffineCell& cell, const Polygon& poly, double kappa, const Vec2& n, const Aff& h,
                       int atom) {
  AffineCell out;
  out.poly = poly;
  out.G = {cell.G[0] + kappa * n[0] * h.g[0], cell.G[1] + kappa * n[0] * h.g[1], cell.G[2] + kappa * n[1] * h.g[0],
           cell.G[3] + kappa * n[1] * h.g[1]};
  out.c = {cell.c[0] + kappa * n[0] * h.gamma, cell.c[1] + kappa * n[1] * h.gamma};
  out.atom = atom;
  return out;
}

std::vector<AffineCell> laminate_once(const AffineCell& cell, double kappa, const Vec2& n, double s, int K,
                                      double eta) {
  const Polygon& poly = cell.poly;
  const double area = polygon_area(poly);
  double tmin = 1e300, tmax = -1e300, perim = 0;
  for (size_t k = 0; k < poly.size(); ++k) {
    const double t = dot(poly[k], n);
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
    const Vec2& q = poly[(k + 1) % poly.size()];
    perim += std::hypot(q[0] - poly[k][0], q[1] - poly[k][1]);
  }
  const double E = tmax - tmin, eps = E / K, hmax = s * (1 - s) * eps;
  const double M = hmax * perim / (0.5 * eta * area);
  const double w = hmax / M;  // width of the band where the cutoff can be active

  // boundary distance functions M (c_e - a_e.x)
  std::vector<Aff> edges;
  std::vector<std::pair<Vec2, double>> edge_geo;
  for (size_t k = 0; k < poly.size(); ++k) {
    const Vec2 &p = poly[k], &q = poly[(k + 1) % poly.size()];
    const double len = std::hypot(q[0] - p[0], q[1] - p[1]);
    const Vec2 a{(q[1] - p[1]) / len, -(q[0] - p[0]) / len};
    edge_geo.push_back({a, dot(a, p)});
    edges.push_back({{-M * a[0], -M * a[1]}, M * dot(a, p)});
  }

  std::vector<AffineCell> out;
  const double tiny = 1e-15 * area;
  for (int k = 0; k < K; ++k) {
    for (int part = 0; part < 2; ++part) {
      const double lo = part == 0 ? k * eps : k * eps + s * eps;
      const double hi = part == 0 ? k * eps + s * eps : (k + 1 == K ? E : (k + 1) * eps);
      if (!(hi > lo)) continue;
      Polygon slab = poly;
      if (k > 0 || part > 0) slab = clip(slab, {-n[0], -n[1]}, -(tmin + lo));
      if (k + 1 < K || part == 0) slab = clip(slab, n, tmin + hi);
      if (slab.empty() || polygon_area(slab) <= tiny) continue;
      // rising part carries B2 = A + (1-s) kappa n n, falling part carries B1
      const Aff h0 = part == 0 ? Aff{{(1 - s) * n[0], (1 - s) * n[1]}, -(1 - s) * (tmin + k * eps)}
                               : Aff{{-s * n[0], -s * n[1]}, s * ((k + 1) * eps + tmin)};
      const int atom = part == 0 ? 1 : 0;
      std::vector<Aff> cand{h0};
      for (size_t e = 0; e < edges.size(); ++e) {
        double dmin = 1e300;
        for (const auto& v : slab) dmin = std::min(dmin, edge_geo[e].second - dot(edge_geo[e].first, v));
        if (dmin < w) cand.push_back(edges[e]);
      }
      for (size_t q = 0; q < cand.size(); ++q) {
        Polygon reg = slab;
        for (size_t m = 0; m < cand.size() && !reg.empty(); ++m) {
          if (m == q) continue;
          reg = clip(reg, {cand[q].g[0] - cand[m].g[0], cand[q].g[1] - cand[m].g[1]}, cand[m].gamma - cand[q].gamma);
        }
        if (reg.empty() || polygon_area(reg) <= tiny) continue;
        out.push_back(add_profile(cell, reg, kappa, n, cand[q], q == 0 ? atom : -1));
      }
    }
  }
  return out;
}

}  // namespace

double cutoff_slope(const Polygon& poly, const Vec2& n, double s, double eta, double theta) {
  double tmin = 1e300, tmax = -1e300, perim = 0;
  for (size_t k = 0; k < poly.size(); ++k) {
    tmin = std::min(tmin, dot(poly[k], n));
    tmax = std::max(tmax, dot(poly[k], n));
    const Vec2& q = poly[(k + 1) % poly.size()];
    perim += std::hypot(q[0] - poly[k][0], q[1] - poly[k][1]);
  }
  const double hmax = s * (1 - s) * (tmax - tmin) / std::ceil(1 / theta);
  return hmax * perim / (0.5 * eta * polygon_area(poly));
}

std::vector<AffineCell> simple_lamination(const AffineCell& cell, const SymMatrix2& A, const SymMatrix2& B1,
                                          const SymMatrix2& B2, double s, const OscParams& osc) {
  if (!(s >= 0 && s <= 1)) throw InvalidSplitError("lamination weight outside [0,1]");
  const SymMatrix2 bc = B1 * (1 - s) + B2 * s;
  const double sc = std::max({1.0, A.max_abs(), B1.max_abs(), B2.max_abs()});
  if (max_entry_diff(bc, A) > 1e-10 * sc) throw InvalidSplitError("lamination barycenter does not match the cell gradient");
  if (frob(cell.G, to_mat(A)) > 1e-9 * mat_scale(cell.G))
    throw InvalidSplitError("cell gradient differs from the lamination barycenter");
  if (s == 0 || s == 1 || B1 == B2) {
    AffineCell c = cell;
    c.atom = s == 1 ? 1 : 0;
    return {c};
  }
  const RankOne ro = rank_one_decompose(B2 - B1);
  if (ro.second > 1e-10 * std::fabs(ro.kappa)) throw InvalidSplitError("lamination directions are not rank-one connected");

  double tmin = 1e300, tmax = -1e300;
  for (const auto& v : cell.poly) {
    tmin = std::min(tmin, dot(v, ro.n));
    tmax = std::max(tmax, dot(v, ro.n));
  }
  const double E = tmax - tmin;
  const double k_sup = std::ceil(s * (1 - s) * std::fabs(ro.kappa) * E / osc.sup_step);
  double Kd = std::max(std::ceil(1 / osc.theta), k_sup);
  const double area = polygon_area(cell.poly);
  for (int attempt = 0;; ++attempt) {
    if (Kd > osc.max_periods)
      throw InfeasibleError("lamination needs " + std::to_string(Kd) + " periods (sup step " +
                            std::to_string(osc.sup_step) + ", |kappa| " + std::to_string(std::fabs(ro.kappa)) +
                            ", extent " + std::to_string(E) + ", eta " + std::to_string(osc.eta) + ")");
    auto cells = laminate_once(cell, ro.kappa, ro.n, s, static_cast<int>(Kd), osc.eta);
    double a1 = 0, a2 = 0;
    for (const auto& c : cells) (c.atom == 1 ? a2 : c.atom == 0 ? a1 : a1) += c.atom >= 0 ? polygon_area(c.poly) : 0;
    const double frac = a2 / (a1 + a2);
    // partial periods of non-rectangular cells skew the ratio; refine until it is within budget
    if (std::fabs(frac - s) * (a1 + a2) <= 0.25 * osc.eta * area || attempt >= 12) return cells;
    Kd *= 2;
  }
}

namespace {

Polygon cut_fraction(const Polygon& poly, const Vec2& n, double f, Polygon& rest) {
  double lo = 1e300, hi = -1e300;
  for (const auto& v : poly) {
    lo = std::min(lo, dot(v, n));
    hi = std::max(hi, dot(v, n));
  }
  const double area = polygon_area(poly);
  for (int it = 0; it < 100; ++it) {
    const double mid = (lo + hi) / 2;
    const Polygon part = clip(poly, n, mid);
    (polygon_area(part) < f * area ? lo : hi) = mid;
  }
  rest = clip(poly, {-n[0], -n[1]}, -hi);
  return clip(poly, n, hi);
}

}  // namespace

PAMap realize_laminate(const AffineCell& cell, const Laminate& nu, double grad_tol, double eta, double sup_budget,
                       RealizeReport* report, const OscParams& base) {
  if (frob(cell.G, to_mat(nu.root.X)) > 1e-9 * mat_scale(cell.G))
    throw InvalidSplitError("cell gradient differs from the laminate root");
  const size_t nsteps = nu.certificate.size();
  OscParams osc = base;
  osc.eta = eta / std::max<size_t>(1, nsteps);
  osc.sup_step = sup_budget / std::max<size_t>(1, nsteps);
  const double root_area = polygon_area(cell.poly);

  PAMap map;
  map.domain = cell.poly;
  map.G0 = cell.G;
  map.c0 = cell.c;
  AffineCell c0 = cell;
  c0.atom = 0;
  std::vector<AffineCell> cells{c0};
  Laminate cur = Laminate::dirac(nu.root.X, nu.root.tag);
  constexpr int kUnrealized = -2;

  for (const SplitStep& st : nu.certificate) {
    const Laminate next = elementary_split(cur, st);
    std::vector<int> remap(cur.atoms.size(), -1);
    for (size_t a = 0; a < cur.atoms.size(); ++a)
      if (static_cast<int>(a) != st.atom) remap[a] = next.find(cur.atoms[a].X);
    const int i1 = next.find(st.B1), i2 = next.find(st.B2);
    const int irem = st.fraction < 1 ? next.find(cur.atoms[st.atom].X) : -1;
    const SymMatrix2 X = cur.atoms[st.atom].X;
    std::vector<AffineCell> out;
    out.reserve(cells.size() * 2);
    for (auto& c : cells) {
      if (c.atom != st.atom) {
        if (c.atom >= 0) c.atom = remap[c.atom];
        out.push_back(std::move(c));
        continue;
      }
      if (st.fraction == 0) {
        c.atom = next.find(X);
        out.push_back(std::move(c));
        continue;
      }
      if (polygon_area(c.poly) < osc.min_area * root_area) {
        c.atom = kUnrealized;
        out.push_back(std::move(c));
        continue;
      }
      // a side too thin to resolve is absorbed by the other one; the gradient stays within grad_tol-scale drift
      const double minor = std::min(st.s, 1 - st.s) * st.fraction * polygon_area(c.poly);
      if (minor < osc.min_area * root_area) {
        c.atom = st.fraction < 1 ? irem : (st.s < 0.5 ? i1 : i2);
        out.push_back(std::move(c));
        continue;
      }
      const RankOne dir = rank_one_decompose(st.B2 - st.B1);
      if (std::fabs(dir.kappa) * cutoff_slope(c.poly, dir.n, st.s, osc.eta, osc.theta) > osc.layer_cap) {
        c.atom = kUnrealized;
        out.push_back(std::move(c));
        continue;
      }
      AffineCell target = c;
      if (st.fraction < 1) {
        const RankOne ro = rank_one_decompose(st.B2 - st.B1);
        AffineCell keep = c;
        target.poly = cut_fraction(c.poly, ro.n, st.fraction, keep.poly);
        keep.atom = irem;
        if (!keep.poly.empty()) out.push_back(keep);
        if (target.poly.empty()) continue;
      }
      for (auto& piece : simple_lamination(target, X, st.B1, st.B2, st.s, osc)) {
        piece.atom = piece.atom == 0 ? i1 : piece.atom == 1 ? i2 : -1;
        out.push_back(std::move(piece));
      }
    }
    cells = std::move(out);
    cur = next;
  }
  for (auto& c : cells)
    if (c.atom >= 0) c.label = cur.atoms[c.atom].tag;
  map.cells = std::move(cells);

  if (report) {
    RealizeReport& r = *report;
    r = RealizeReport{};
    const size_t na = cur.atoms.size();
    double tol = grad_tol;
    if (!(tol > 0)) {
      double gap = 1e300;
      for (size_t a = 0; a < na; ++a)
        for (size_t b = a + 1; b < na; ++b) gap = std::min(gap, frob(to_mat(cur.atoms[a].X), to_mat(cur.atoms[b].X)));
      tol = std::min(gap / 4, 1e-6 * mat_scale(cell.G));
    }
    r.fractions.assign(na, 0);
    for (const auto& a : cur.atoms) r.weights.push_back(a.weight);
    for (const auto& c : map.cells) {
      const double ar = polygon_area(c.poly) / root_area;
      if (c.atom == -1) r.layer_fraction += ar;
      if (c.atom == kUnrealized) r.unrealized_fraction += ar;
      if (std::fabs(c.G[1] - c.G[2]) > 1e-6) r.antisym_fraction += ar;
      for (size_t a = 0; a < na; ++a)
        if (frob(c.G, to_mat(cur.atoms[a].X)) < tol) {
          r.fractions[a] += ar;
          break;
        }
    }
    for (size_t a = 0; a < na; ++a) r.max_fraction_error = std::max(r.max_fraction_error, std::fabs(r.fractions[a] - r.weights[a]));
    r.sup_deviation = check_map(map, 0).sup_deviation;
  }
  return map;
}

namespace {

bool contains(const Polygon& P, const Vec2& x, double tol) {
  for (size_t k = 0; k < P.size(); ++k) {
    const Vec2 &p = P[k], &q = P[(k + 1) % P.size()];
    const double ex = q[0] - p[0], ey = q[1] - p[1];
    const double cr = ex * (x[1] - p[1]) - ey * (x[0] - p[0]);
    if (cr < -tol * std::hypot(ex, ey)) return false;
  }
  return true;
}

struct Grid {
  double x0, y0, hx, hy;
  int nx, ny;
  std::vector<std::vector<int>> bins;
  std::vector<std::array<double, 4>> boxes;

  Grid(const PAMap& m) {
    double xa = 1e300, xb = -1e300, ya = 1e300, yb = -1e300;
    for (const auto& v : m.domain) {
      xa = std::min(xa, v[0]);
      xb = std::max(xb, v[0]);
      ya = std::min(ya, v[1]);
      yb = std::max(yb, v[1]);
    }
    nx = ny = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(m.cells.size()))), 1, 1024);
    x0 = xa;
    y0 = ya;
    hx = (xb - xa) / nx;
    hy = (yb - ya) / ny;
    bins.resize(static_cast<size_t>(nx) * ny);
    for (size_t c = 0; c < m.cells.size(); ++c) {
      std::array<double, 4> b{1e300, -1e300, 1e300, -1e300};
      for (const auto& v : m.cells[c].poly) {
        b[0] = std::min(b[0], v[0]);
        b[1] = std::max(b[1], v[0]);
        b[2] = std::min(b[2], v[1]);
        b[3] = std::max(b[3], v[1]);
      }
      boxes.push_back(b);
      const int i0 = bin_x(b[0] - 1e-12), i1 = bin_x(b[1] + 1e-12), j0 = bin_y(b[2] - 1e-12), j1 = bin_y(b[3] + 1e-12);
      for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j) bins[static_cast<size_t>(j) * nx + i].push_back(static_cast<int>(c));
    }
  }
  int bin_x(double x) const { return std::clamp(static_cast<int>((x - x0) / hx), 0, nx - 1); }
  int bin_y(double y) const { return std::clamp(static_cast<int>((y - y0) / hy), 0, ny - 1); }
  const std::vector<int>& at(const Vec2& v) const { return bins[static_cast<size_t>(bin_y(v[1])) * nx + bin_x(v[0])]; }
};

double vdist(const Vec2& a, const Vec2& b) { return std::max(std::fabs(a[0] - b[0]), std::fabs(a[1] - b[1])); }

}  // namespace

MapChecks check_map(const PAMap& map, int boundary_samples) {
  MapChecks mc;
  const double dom = polygon_area(map.domain);
  double total = 0, diam = 0;
  AffineCell base;
  base.G = map.G0;
  base.c = map.c0;
  for (const auto& c : map.cells) {
    const double a = polygon_area(c.poly);
    total += a;
    diam += polygon_diameter(c.poly);
    if (std::fabs(c.G[1] - c.G[2]) > 1e-6) mc.antisym_fraction += a / dom;
    for (const auto& v : c.poly) mc.sup_deviation = std::max(mc.sup_deviation, vdist(c.eval(v), base.eval(v)));
  }
  mc.tiling_error = std::fabs(total - dom) / dom;
  mc.mean_diameter = map.cells.empty() ? 0 : diam / map.cells.size();
  if (boundary_samples <= 0) return mc;

  const Grid grid(map);
  constexpr double tol = 1e-14;
  for (size_t c = 0; c < map.cells.size(); ++c)
    for (const auto& v : map.cells[c].poly) {
      const Vec2 u = map.cells[c].eval(v);
      for (int d : grid.at(v)) {
        if (d == static_cast<int>(c)) continue;
        const auto& b = grid.boxes[d];
        if (v[0] < b[0] - tol || v[0] > b[1] + tol || v[1] < b[2] - tol || v[1] > b[3] + tol) continue;
        if (!contains(map.cells[d].poly, v, tol)) continue;
        mc.continuity_error = std::max(mc.continuity_error, vdist(u, map.cells[d].eval(v)));
      }
    }

  double perim = 0;
  const auto& D = map.domain;
  for (size_t k = 0; k < D.size(); ++k) perim += std::hypot(D[(k + 1) % D.size()][0] - D[k][0], D[(k + 1) % D.size()][1] - D[k][1]);
  for (int sidx = 0; sidx < boundary_samples; ++sidx) {
    double arc = perim * (sidx + 0.5) / boundary_samples;
    Vec2 x{};
    for (size_t k = 0; k < D.size(); ++k) {
      const Vec2 &p = D[k], &q = D[(k + 1) % D.size()];
      const double len = std::hypot(q[0] - p[0], q[1] - p[1]);
      if (arc <= len || k + 1 == D.size()) {
        const double t = std::min(1.0, arc / len);
        x = {p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])};
        break;
      }
      arc -= len;
    }
    bool found = false;
    for (int d : grid.at(x)) {
      if (!contains(map.cells[d].poly, x, tol)) continue;
      found = true;
      mc.boundary_error = std::max(mc.boundary_error, vdist(map.cells[d].eval(x), base.eval(x)));
    }
    if (!found) mc.boundary_error = std::max(mc.boundary_error, 1e300);
  }
  return mc;
}

SchemeRealization realize_scheme(const Scheme& s, const ParamPoint& P0, int depth, const OscParams& osc,
                                 size_t cell_cap) {
  if (depth < 1 || depth > 4) throw ConfigError("realization depth must lie in [1,4]");
  const auto& cfg = s.setup.cfg;
  const int I = s.setup.sc.I;
  SchemeRealization res;
  AffineCell root;
  root.poly = unit_square();
  root.G = to_mat(family_matrix(cfg, Kind::A, I, P0));
  root.c = {0, 0};
  root.label = AtomTag{Kind::A, I, std::nullopt};
  res.map.domain = root.poly;
  res.map.G0 = root.G;
  res.map.c0 = root.c;
  std::vector<AffineCell> cells{root};

  for (int k = 1; k <= depth; ++k) {
    const Blend tn = s.blend(k);
    std::optional<Blend> to;
    if (k >= 2) to = s.blend(k - 1);
    std::map<std::pair<int, int>, Laminate> cache;
    std::vector<AffineCell> out;
    for (auto& c : cells) {
      if (!c.label) {
        out.push_back(std::move(c));
        continue;
      }
      const AtomTag lab = *c.label;
      const auto key = std::make_pair(static_cast<int>(lab.kind), lab.index);
      auto it = cache.find(key);
      if (it == cache.end()) {
        Laminate lam;
        if (lab.kind == Kind::A)
          lam = build_mu_interp(cfg, lab.index, lab.index + 1, tn, P0);
        else if (lab.kind == Kind::W1 || lab.kind == Kind::W2)
          lam = build_corr(cfg, lab.kind == Kind::W1 ? 1 : 2, lab.index, I + k, *to, tn, P0);
        else
          throw InternalError("unexpected label in the realized scheme");
        it = cache.emplace(key, std::move(lam)).first;
      }
      PAMap sub = realize_laminate(c, it->second, 0, osc.eta, osc.sup_step, nullptr, osc);
      for (auto& sc : sub.cells) out.push_back(std::move(sc));
      if (out.size() > cell_cap) throw CapError("cell count cap exceeded at depth " + std::to_string(k));
    }
    cells = std::move(out);
    double dsum = 0;
    size_t dn = 0;
    for (const auto& c : cells)
      if (c.label) {
        dsum += polygon_diameter(c.poly);
        ++dn;
      }
    res.mean_diameter.push_back(dn ? dsum / dn : 0);
  }
  res.map.cells = std::move(cells);

  // empirical distribution against the mass-flow simulator at the same stage
  const RunResult sim = run(s, P0, depth);
  std::map<std::pair<int, int>, HistogramEntry> hist;
  auto key_of = [](Kind k, int i) { return std::make_pair(static_cast<int>(k == Kind::A ? Kind::V : k), i); };
  for (const auto& c : sim.final.cells) {
    auto& h = hist[key_of(c.kind, c.index)];
    h.kind = c.kind;
    h.index = c.index;
    h.sim_mass += c.mass;
  }
  const Blend tl = s.blend(depth);
  const double dom = polygon_area(res.map.domain);
  for (const auto& c : res.map.cells) {
    const double a = polygon_area(c.poly) / dom;
    bool ok = false;
    if (c.label) {
      const Kind kk = c.label->kind == Kind::A ? Kind::V : c.label->kind;
      const SymMatrix2 X = labeled_matrix(cfg, kk, c.label->index, kk == Kind::V ? std::nullopt : std::optional(tl), P0);
      if (frob(c.G, to_mat(X)) < 1e-6 * mat_scale(c.G)) {
        auto& h = hist[key_of(kk, c.label->index)];
        h.kind = kk;
        h.index = c.label->index;
        h.area_fraction += a;
        ok = true;
      }
    }
    if (!ok) res.unclassified_fraction += a;
  }
  for (auto& [k, h] : hist) {
    res.histogram.push_back(h);
    res.max_histogram_error = std::max(res.max_histogram_error, std::fabs(h.area_fraction - h.sim_mass));
  }
  return res;
}

}  // namespace stairlam

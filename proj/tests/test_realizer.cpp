#include "common.hpp"

using namespace tst;

TEST_CASE("polygon utilities") {
  const auto sq = unit_square();
  CHECK(polygon_area(sq) == 1);
  CHECK(polygon_diameter(sq) == doctest::Approx(std::sqrt(2.0)));
  const auto half = clip(sq, {1, 0}, 0.25);
  CHECK(polygon_area(half) == doctest::Approx(0.25));
  CHECK((clip(sq, {1, 0}, -1).empty()));
}

TEST_CASE("simple lamination") {
  AffineCell cell;
  cell.poly = unit_square();
  cell.G = {0, 0, 0, 0};
  cell.c = {0, 0};
  const SymMatrix2 A{0, 0, 0}, B1{0, 0, 1}, B2{0, 0, -1};
  OscParams osc;
  const auto degenerate = simple_lamination(cell, A, A, B2, 0, osc);
  CHECK(degenerate.size() == 1);
  const auto cells = simple_lamination(cell, A, B1, B2, 0.5, osc);
  PAMap m{cell.poly, cells, cell.G, cell.c};
  double f1 = 0, f2 = 0, total = 0;
  for (const auto& c : cells) {
    const double a = polygon_area(c.poly);
    total += a;
    if (c.atom == 0) f1 += a;
    if (c.atom == 1) f2 += a;
  }
  CHECK(total == doctest::Approx(1).epsilon(1e-12));
  CHECK(std::fabs(f1 - 0.5) < 0.05);
  CHECK(std::fabs(f2 - 0.5) < 0.05);
  const auto mc = check_map(m);
  CHECK(mc.boundary_error < 1e-12);
  CHECK(mc.continuity_error < 1e-12);
  // predicted sup step: s (1 - s) |kappa| extent / K with K = 8
  CHECK(mc.sup_deviation <= 0.25 * 2 * 1 / 8 + 1e-12);
  CHECK_THROWS_AS((simple_lamination(cell, A, {1, 0, 1}, {-1, 0, -1}, 0.5, osc)), InvalidSplitError);
}

TEST_CASE("period budget") {
  AffineCell cell;
  cell.poly = unit_square();
  cell.G = {0, 0, 0, 0};
  OscParams osc;
  osc.sup_step = 1e-9;
  CHECK_THROWS_AS((simple_lamination(cell, {0, 0, 0}, {0, 0, 1}, {0, 0, -1}, 0.5, osc)), InfeasibleError);
  osc.sup_step = 1e-3;
  const auto cells = simple_lamination(cell, {0, 0, 0}, {0, 0, 1}, {0, 0, -1}, 0.5, osc);
  const auto mc = check_map(PAMap{cell.poly, cells, cell.G, cell.c});
  CHECK(mc.sup_deviation <= 1e-3 + 1e-12);
}

TEST_CASE("realization of a Dirac laminate") {
  AffineCell cell;
  cell.poly = unit_square();
  const SymMatrix2 X{1, 0.5, 2};
  cell.G = to_mat(X);
  const auto m = realize_laminate(cell, Laminate::dirac(X), 0, 0.05, 1e300, nullptr, {});
  CHECK(m.cells.size() == 1);
}

TEST_CASE("depth-one realization of mu_I") {
  const auto& su = ref_setup();
  const auto nu = build_mu_i(su.cfg, su.sc.I, P0);
  AffineCell cell;
  cell.poly = unit_square();
  cell.G = to_mat(nu.root.X);
  RealizeReport rep;
  const auto m = realize_laminate(cell, nu, 0, 0.05, 1e300, &rep, {});
  CHECK(rep.max_fraction_error <= 0.05);
  const auto k = split_coeffs(su.cfg, su.sc.I, P0);
  const double want[] = {k.l1, k.l2, k.l3};
  for (int a = 0; a < 3; ++a) {
    const int idx = nu.find(family_matrix(su.cfg, a == 0 ? Kind::B : a == 1 ? Kind::D : Kind::E, su.sc.I, P0));
    CHECK(std::fabs(rep.fractions[idx] - want[a]) <= 0.05);
  }
  const auto mc = check_map(m);
  CHECK(mc.boundary_error <= 1e-9);
  CHECK(mc.continuity_error <= 1e-9);
  CHECK(mc.tiling_error <= 1e-9);
}

TEST_CASE("scheme realization") {
  const Scheme s{ref_setup(), {}};
  const auto r1 = realize_scheme(s, P0, 1, {});
  CHECK(r1.max_histogram_error <= 0.05);
  const auto r2 = realize_scheme(s, P0, 2, {});
  CHECK(r2.max_histogram_error <= 0.07);
  const auto mc = check_map(r2.map);
  CHECK(mc.boundary_error <= 1e-9);
  CHECK(mc.continuity_error <= 1e-9);
  CHECK(mc.tiling_error <= 1e-9);
  REQUIRE(r2.mean_diameter.size() == 2);
  CHECK(r2.mean_diameter[1] < r2.mean_diameter[0]);
  for (const auto& c : r2.map.cells) CHECK(std::isfinite(c.G[0] + c.G[1] + c.G[2] + c.G[3]));
  CHECK_THROWS_AS((realize_scheme(s, P0, 5, {})), ConfigError);
  CHECK_THROWS_AS((realize_scheme(s, P0, 2, {}, 1000)), CapError);
}

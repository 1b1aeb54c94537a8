#include "common.hpp"

using namespace tst;

// reference values: tests/oracle/oracle.py; coefficients there come from solving
// the barycenter systems, not from the closed forms used here
TEST_CASE("sequences") {
  const auto c = ref_cfg();
  CHECK(a_seq(c, Sign::Plus, 2, P0) == doctest::Approx(2.71).epsilon(1e-15));
  CHECK(a_seq(c, Sign::Minus, 1, P0) == doctest::Approx(2.0244044240850757735).epsilon(1e-14));
  CHECK(a_seq(c, Sign::Plus, 1, P0) - P0.a0p == doctest::Approx(1.1).epsilon(1e-15));
}

TEST_CASE("family matrices") {
  const auto c = ref_cfg();
  const auto A3 = family_matrix(c, Kind::A, 3, P0);
  CHECK(A3.a11 == doctest::Approx(2.831).epsilon(1e-15));
  CHECK(A3.a12 == 0);
  CHECK(A3.a22 == doctest::Approx(7.5192435295170956682).epsilon(1e-13));
  for (int i : {1, 5, 40, 80}) {
    CHECK(max_entry_diff(family_matrix(c, Kind::E, i, P1), family_matrix(c, Kind::A, i + 1, P1)) == 0);
    CHECK(kf_residual(c.profile, family_matrix(c, Kind::B, i, P1)) == 0);
    CHECK(family_matrix(c, Kind::V, i, P1) == family_matrix(c, Kind::A, i, P1));
  }
}

TEST_CASE("split coefficients against the barycenter oracle") {
  const auto c = ref_cfg();
  struct Row {
    int i;
    ParamPoint P;
    double l1, l2, l3;
  };
  const Row rows[] = {
      {3, P0, 0.021600213339083464574, 0.025227225047489052942, 0.95317256161342748248},
      {3, P1, 0.020157863967860880555, 0.025264414826842047524, 0.95457772120529707192},
      {39, P0, 0.058139720180889111999, 0.05549110146203142944, 0.88636917835707945856},
      {39, P1, 0.057754549454442952329, 0.055513794369163613736, 0.88673165617639343394},
      {59, P0, 0.061027211892810006977, 0.057421011190195090834, 0.88155177691699490219},
      {59, P1, 0.060963775888637014226, 0.057424890492717607447, 0.88161133361864537833},
  };
  for (const auto& r : rows) {
    const auto k = split_coeffs(c, r.i, r.P);
    CHECK(k.l1 == doctest::Approx(r.l1).epsilon(1e-11));
    CHECK(k.l2 == doctest::Approx(r.l2).epsilon(1e-11));
    CHECK(k.l3 == doctest::Approx(r.l3).epsilon(1e-11));
  }
  CHECK(split_coeffs(c, 2000, P0).l3 == doctest::Approx(0.88066771137182933756).epsilon(1e-10));
}

TEST_CASE("interpolated coefficients against the barycenter oracle") {
  const auto c = ref_cfg();
  auto k = interp_coeffs(c, 59, 0.9, P0);
  CHECK(k.l1 == doctest::Approx(0.067351317312799110597).epsilon(1e-11));
  CHECK(k.l2 == doctest::Approx(0.063371414572984254473).epsilon(1e-11));
  CHECK(k.l3 == doctest::Approx(0.86927726811421663493).epsilon(1e-11));
  k = interp_coeffs(c, 59, 0.999999, P0);
  CHECK(k.l1 == doctest::Approx(0.061027269195755114284).epsilon(1e-10));
  CHECK(k.l3 == doctest::Approx(0.88155166569723219527).epsilon(1e-10));
  k = interp_coeffs(c, 59, 0.01, P0);
  CHECK(k.l3 == doctest::Approx(-0.6820984192632906907).epsilon(1e-10));
  CHECK(k.l3 < 0);  // small t leaves the simplex
  CHECK(k.sum() == doctest::Approx(1).epsilon(1e-14));
}

TEST_CASE("interpolation maps") {
  const auto c = ref_cfg();
  const auto B = family_matrix(c, Kind::B, 7, P1), A = family_matrix(c, Kind::A, 7, P1);
  const auto M = interp_map(c, 1, 7, 0.5, P1);
  CHECK(M.a22 == doctest::Approx((A.a22 + B.a22) / 2).epsilon(1e-14));
  CHECK(max_entry_diff(interp_map(c, 1, 7, 1 - 1e-15, P1), B) < 1e-12);
  CHECK(max_entry_diff(interp_map(c, 2, 7, 1e-15, P1), family_matrix(c, Kind::A, 8, P1)) < 1e-12);
}

TEST_CASE("inversion") {
  const auto c = ref_cfg();
  const auto back = invert_family(c, Kind::A, 9, std::nullopt, family_matrix(c, Kind::A, 9, P1));
  CHECK(std::fabs(back.a0p - P1.a0p) < 1e-9);
  CHECK(std::fabs(back.a0m - P1.a0m) < 1e-9);
  CHECK(back.b == P1.b);
  const auto t = Blend::from_t(0.8);
  const auto w = invert_family(c, Kind::W1, 9, t, interp_map(c, 1, 9, t, P1));
  CHECK(std::fabs(w.a0p - P1.a0p) < 1e-9);
  CHECK(std::fabs(w.a0m - P1.a0m) < 1e-9);
  auto X = family_matrix(c, Kind::A, 9, P1);
  X.a11 = 2.5 + std::pow(1.1, 9);
  CHECK_THROWS_AS(invert_family(c, Kind::A, 9, std::nullopt, X), NotInImageError);
}

TEST_CASE("critical exponent and limit identity") {
  CHECK(p_critical(1, 4) == doctest::Approx(4.0 / 3).epsilon(1e-15));
  CHECK(p_critical(1, 9) == doctest::Approx(1.5).epsilon(1e-15));
  double prev = 0;
  for (double L = 2; L < 1e8; L *= 3) {
    const double v = p_critical(1, L);
    CHECK(v > prev);
    CHECK(v < 2);
    prev = v;
  }
  CHECK(log_r_L(1, 4, 1 + 1e-4) == doctest::Approx(1.3333333332716111106).epsilon(1e-9));
  CHECK(log_r_L(1, 4, 1.1) == doctest::Approx(1.3332772696819787059).epsilon(1e-12));
  for (double r = 1.01; r < 2; r += 0.01) CHECK(limit_L(1, 4, r) < r * r);
}

TEST_CASE("blend deficits") {
  const auto t = Blend::from_t(0.75);
  CHECK(t.t() == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(t.deficit() == doctest::Approx(0.25).epsilon(1e-15));
  const auto tiny = Blend::from_log_deficit(-300.0L);
  CHECK(tiny.t() == 1.0);
  CHECK(tiny.deficit() > 0);
  // 1 - t/t' for t < t'
  const auto a = Blend::from_t(0.5), b = Blend::from_t(0.8);
  CHECK(corr_split_weight(a, b) == doctest::Approx(1 - 0.5 / 0.8).epsilon(1e-14));
  CHECK_THROWS_AS(corr_split_weight(b, a), ScheduleError);
}

TEST_CASE("property: barycenter identities, simplex, rank-one directions, round trips") {
  const auto c = ref_cfg();
  std::mt19937_64 g(11);
  std::uniform_int_distribution<int> ui(1, 39 + 50);
  for (int n = 0; n < 1000; ++n) {
    const int i = ui(g);
    const auto P = random_point(g);
    const auto A = family_matrix(c, Kind::A, i, P), B = family_matrix(c, Kind::B, i, P),
               C = family_matrix(c, Kind::C, i, P), D = family_matrix(c, Kind::D, i, P),
               E = family_matrix(c, Kind::E, i, P);
    const auto k = split_coeffs(c, i, P);
    const double sc = std::max({1.0, A.max_abs(), B.max_abs(), D.max_abs()});
    CHECK(std::fabs(k.sum() - 1) < 1e-12);
    CHECK(k.l1 > 0);
    CHECK(k.l2 > 0);
    CHECK(k.l3 > 0);
    CHECK(max_entry_diff(B * k.l1 + D * k.l2 + E * k.l3, A) < 1e-10 * sc);
    CHECK(max_entry_diff(E, family_matrix(c, Kind::A, i + 1, P)) == 0);
    // A-B and C-A differ only in a22, D-C only in a11: rank one
    CHECK((A - B).a11 == 0);
    CHECK((A - C).a11 == 0);
    CHECK((C - D).a22 == 0);
    CHECK((C - E).a22 == 0);
    const auto back = invert_family(c, Kind::A, i, std::nullopt, A);
    CHECK(std::fabs(back.a0p - P.a0p) < 1e-9 * sc);
    CHECK(std::fabs(back.a0m - P.a0m) < 1e-9 * sc);
  }
}

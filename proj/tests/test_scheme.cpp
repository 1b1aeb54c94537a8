#include "common.hpp"

using namespace tst;

namespace {
const RunResult& ref_run() {
  static const RunResult r = run(Scheme{ref_setup(), {}}, P0, 40);
  return r;
}
}  // namespace

TEST_CASE("initial ensemble") {
  const Scheme s{ref_setup(), {}};
  const auto e = init(s, P0);
  REQUIRE(e.cells.size() == 1);
  CHECK(e.total_mass() == 1);
  CHECK(e.cells[0].X.a11 == doctest::Approx(1.5 + std::pow(1.1, 59)).epsilon(1e-15));
  const auto back = invert_family(s.setup.cfg, Kind::A, 59, std::nullopt, e.cells[0].X);
  CHECK(std::fabs(back.a0p - P0.a0p) < 1e-9);
}

TEST_CASE("first step") {
  const Scheme s{ref_setup(), {}};
  const auto e1 = step(init(s, P0), s);
  REQUIRE(e1.cells.size() == 3);
  const auto k = interp_coeffs(s.setup.cfg, 59, s.blend(1), P0);
  double v = 0;
  for (const auto& c : e1.cells) {
    CHECK(c.X.a12 == 0);
    if (c.kind == Kind::W1) CHECK(c.mass == doctest::Approx(k.l1).epsilon(1e-13));
    if (c.kind == Kind::W2) CHECK(c.mass == doctest::Approx(k.l2).epsilon(1e-13));
    if (c.kind == Kind::V) v = c.mass;
  }
  CHECK(v == doctest::Approx(k.l3).epsilon(1e-13));
  const auto& c = s.setup.cfg;
  CHECK(v >= std::pow(c.r, -2));
  CHECK(v <= std::pow(c.r, -(c.p + delta_seq(c.delta, 1))));
  const auto d = diagnostics(e1, s);
  REQUIRE(d.bands.size() >= 1);
  CHECK(d.V_mass == doctest::Approx(k.l3).epsilon(1e-12));
  CHECK(d.bands[0].Q == doctest::Approx(k.l1 + k.l2).epsilon(1e-12));
  const auto r1 = run(s, P0, 1);
  CHECK(r1.final.cells.size() == 3);
}

TEST_CASE("forty stages: bounds, mass, growth") {
  const auto& r = ref_run();
  REQUIRE(r.stages.size() >= 40);
  CHECK(r.summary.bounds_ok);
  CHECK(r.summary.max_mass_error < 1e-12);
  for (const auto& st : r.stages) {
    CHECK(std::fabs(st.total_mass - 1) < 1e-12);
    CHECK(st.violations.empty());
    CHECK(st.cells <= static_cast<size_t>(2 * st.stage + 1));
  }
  CHECK(r.summary.energy_increasing);
  CHECK(r.summary.energy_above_linear);
  CHECK(std::isfinite(r.summary.Sp_max));
  CHECK(r.summary.Sp_below_envelope);
  CHECK(r.summary.Sp_max <= r.summary.Sp_envelope_bound);
}

TEST_CASE("perturbed schedule is detected") {
  // a schedule far from 1 leaves the interpolated weights outside their bands
  const Scheme s{ref_setup(), [](int) { return static_cast<long double>(std::log(0.3)); }};
  bool caught = false;
  try {
    const auto r = run(s, P0, 5);
    caught = !r.summary.bounds_ok;
  } catch (const Error&) {
    caught = true;
  }
  CHECK(caught);
}

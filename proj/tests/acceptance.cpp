// Acceptance run: one PASS/FAIL line per criterion. Optional argv[1]: path to the CLI binary.
#include <cstdarg>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>

#include "stairlam/io.hpp"

using namespace stairlam;
namespace fs = std::filesystem;

namespace {

// pinned tolerances
constexpr double kLimitTol = 1e-3;
constexpr double kLimitR = 1 + 1e-4;
constexpr double kBaryTol = 1e-10;
constexpr double kSimplexTol = 1e-12;
constexpr double kRankTol = 1e-10;
constexpr double kInvTol = 1e-9;
constexpr double kMassTol = 1e-12;
constexpr double kSpRelTol = 0.01;
constexpr double kEnergyFactor = 0.9;
constexpr double kR2Min = 0.99;
constexpr double kEta = 0.05;
constexpr double kExact = 1e-9;
constexpr double kHistTol = 0.07;
constexpr double kPinchTol = 1e-9;

constexpr double kTime1 = 1, kTime2 = 5, kTime3 = 30, kTime4 = 5, kTime5 = 60, kTime8 = 120, kTime9 = 10;

const ProfileConfig kProfile{1, 4, 1};
constexpr double kP = 1.2, kDelta = 0.02;
const ParamPoint kP0{1.5, 1.5, 0};

struct Clock {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double s() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

int failures = 0;

void line(int n, const char* name, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("[%s] criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", n, name, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

ParamPoint rand_point(std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(1e-6, 1 - 1e-6), v(-1 + 1e-6, 1 - 1e-6);
  return {1 + u(g), 1 + u(g), v(g)};
}

void guard(int n, const char* name, const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    line(n, name, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  std::printf("acceptance: lambda=1 Lambda=4 p=%.2f delta=%.2f P0=(1.5,1.5,0)\n", kP, kDelta);

  guard(1, "limit identity", [] {
    Clock c;
    std::mt19937_64 g(2024);
    std::uniform_real_distribution<double> ul(0.001, 0.999), uL(1.001, 25);
    double worst = 0;
    for (int k = 0; k < 20; ++k) {
      const double l = ul(g), L = uL(g);
      worst = std::max(worst, std::fabs(log_r_L(l, L, kLimitR) - p_critical(l, L)));
    }
    const double t = c.s();
    line(1, "limit identity", worst < kLimitTol && t < kTime1,
         fmt("max |log_r L(1+1e-4) - p_crit| = %.3g over 20 draws (tol %.0e), %.3f s", worst, kLimitTol, t));
  });

  Setup su;
  double t_cert = 0;
  guard(3, "bracket certification", [&] {
    Clock c;
    su = certify_setup(kProfile, kP, kDelta);
    t_cert = c.s();
  });

  guard(2, "staircase algebra", [&] {
    Clock c;
    const auto& cfg = su.cfg;
    std::mt19937_64 g(7);
    std::uniform_int_distribution<int> ui(1, su.sc.I0 + 50);
    std::uniform_real_distribution<double> ut(su.sc.T0, 0.999);
    double bary = 0, simplex = 0, rank = 0, inv = 0;
    bool positive = true, e_is_a = true;
    for (int k = 0; k < 1000; ++k) {
      const int i = ui(g);
      const auto P = rand_point(g);
      const auto A = family_matrix(cfg, Kind::A, i, P), B = family_matrix(cfg, Kind::B, i, P),
                 C = family_matrix(cfg, Kind::C, i, P), D = family_matrix(cfg, Kind::D, i, P),
                 E = family_matrix(cfg, Kind::E, i, P);
      const double sc = std::max({1.0, A.max_abs(), B.max_abs(), C.max_abs(), D.max_abs(), E.max_abs()});
      const auto co = split_coeffs(cfg, i, P);
      bary = std::max(bary, max_entry_diff(B * co.l1 + D * co.l2 + E * co.l3, A) / sc);
      simplex = std::max(simplex, std::fabs(co.sum() - 1));
      positive = positive && co.l1 > 0 && co.l2 > 0 && co.l3 > 0;
      e_is_a = e_is_a && E == family_matrix(cfg, Kind::A, i + 1, P);
      for (auto [X, Y] : {std::pair{A, B}, {A, C}, {C, D}, {C, E}}) {
        const auto r1 = rank_one_decompose(Y - X);
        rank = std::max(rank, r1.second / std::fabs(r1.kappa));
      }
      const auto t = Blend::from_t(ut(g));
      for (Kind kd : {Kind::A, Kind::W1, Kind::W2}) {
        const std::optional<Blend> tt = kd == Kind::A ? std::nullopt : std::optional(t);
        const auto Q = invert_family(cfg, kd, i, tt, labeled_matrix(cfg, kd, i, tt, P));
        inv = std::max({inv, std::fabs(Q.a0p - P.a0p), std::fabs(Q.a0m - P.a0m), std::fabs(Q.b - P.b)});
      }
    }
    const double t = c.s();
    const bool ok = bary <= kBaryTol && simplex <= kSimplexTol && positive && e_is_a && rank <= kRankTol &&
                    inv <= kInvTol && t < kTime2;
    line(2, "staircase algebra", ok,
         fmt("1000 draws: barycenter %.2g (tol %.0e rel), simplex %.2g (tol %.0e), positive %d, E=A_{i+1} %d, "
             "rank-one %.2g (tol %.0e), inversion %.2g (tol %.0e), %.3f s",
             bary, kBaryTol, simplex, kSimplexTol, positive, e_is_a, rank, kRankTol, inv, kInvTol, t));
  });

  guard(3, "bracket certification", [&] {
    Clock c;
    const auto& cfg = su.cfg;
    const auto& rs = su.rsel;
    bool margins = rs.margins.size() == 51;
    for (const auto& m : rs.margins) margins = margins && m.lower_slack > 0 && m.upper_slack > 0;
    std::mt19937_64 g(99);
    std::uniform_int_distribution<int> ui(rs.I0, rs.I0 + 50);
    const double lo = std::pow(cfg.r, -2), hi = std::pow(cfg.r, -(cfg.p + 2 * cfg.delta));
    int inside = 0;
    for (int k = 0; k < 1000; ++k) {
      const double l3 = split_coeffs(cfg, ui(g), rand_point(g)).l3;
      inside += l3 > lo && l3 < hi;
    }
    const double t = t_cert + c.s();
    line(3, "bracket certification", margins && inside == 1000 && t < kTime3,
         fmt("r=%.6g I0=%d, %zu certified indices, worst slacks lower %.3g upper %.3g, spot checks inside %d/1000, "
             "%.3f s",
             rs.r, rs.I0, rs.margins.size(), rs.worst_lower, rs.worst_upper, inside, t));
  });

  guard(4, "schedule", [&] {
    Clock c;
    const auto rep = verify_schedule(su.sc, 50);
    auto bad = su.sc;
    bad.N = 0;
    const auto r0 = verify_schedule(bad, 50);
    const double t = c.s();
    line(4, "schedule", rep.ok && !r0.ok && t < kTime4,
         fmt("N=%d I=%d: margins seq %.3Lg difficult %.3Lg easy %.3Lg; N=0 gives %zu violation(s), first %s; %.3f s",
             su.sc.N, su.sc.I, rep.min_margin_seq, rep.min_margin_difficult, rep.margin_easy, r0.violations.size(),
             r0.violations.empty() ? "none" : r0.violations[0].what.c_str(), t));
  });

  RunResult res;
  bool have_run = false;
  guard(5, "mass-bound chain", [&] {
    Clock c;
    res = run(Scheme{su, {}}, kP0, 40);
    have_run = true;
    double mass = 0;
    size_t viol = 0;
    for (const auto& st : res.stages) {
      mass = std::max(mass, std::fabs(st.total_mass - 1));
      viol += st.violations.size();
    }
    int rc = 0;
    if (!cli.empty()) {
      const auto dir = fs::temp_directory_path() / "stairlam_acc_c5";
      rc = std::system((cli + " simulate --p 1.2 --delta 0.02 -L 40 -o " + dir.string() + " > /dev/null").c_str());
    }
    const double t = c.s();
    line(5, "mass-bound chain", res.stages.size() == 40 && viol == 0 && res.summary.bounds_ok && mass <= kMassTol &&
                                    rc == 0 && t < kTime5,
         fmt("40 stages, %zu band/V violations, max |mass-1| %.2g (tol %.0e), CLI exit %d%s, %.3f s", viol, mass,
             kMassTol, rc, cli.empty() ? " (not run)" : "", t));
  });

  guard(6, "uniform W1p bound", [&] {
    if (!have_run) throw InternalError("no run");
    const auto& m = res.summary;
    bool finite = true, below = true;
    for (const auto& st : res.stages) {
      finite = finite && std::isfinite(st.Sp);
      below = below && st.Sp <= m.Sp_envelope_bound;
    }
    line(6, "uniform W1p bound", finite && below && m.Sp_rel_change < kSpRelTol,
         fmt("S(p) stage 30 %.6g, max stages 31-40 %.6g, relative change %.4f (tol %.2f), envelope bound %.4g "
             "(C=%.4g), all below %d",
             m.Sp_stage30, m.Sp_last10_max, m.Sp_rel_change, kSpRelTol, m.Sp_envelope_bound, m.envelope_C, below));
  });

  guard(7, "energy blow-up", [&] {
    if (!have_run) throw InternalError("no run");
    const auto& k = su.sc;
    bool inc = true, above = true;
    double worst_ratio = 1e300;
    std::vector<double> x, y;
    for (size_t n = 0; n < res.stages.size(); ++n) {
      const auto& st = res.stages[n];
      if (n > 0) inc = inc && st.energy > res.stages[n - 1].energy;
      if (st.stage >= 5 && st.stage <= 40) {
        const double lb = kEnergyFactor * (1 - std::pow(k.r, -k.p)) * std::pow(k.r, 2 * k.I) * st.stage;
        above = above && st.energy >= lb;
        worst_ratio = std::min(worst_ratio, st.energy / lb);
        x.push_back(st.stage);
        y.push_back(st.energy);
      }
    }
    // least squares E = a + b l
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
      syy += y[i] * y[i];
    }
    const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double r2 = (n * sxy - sx * sy) * (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy));
    line(7, "energy blow-up", inc && above && b > 0 && r2 > kR2Min,
         fmt("strictly increasing %d, min E_l / lower bound %.4g over l in [5,40], fit slope %.4g, R^2 %.4f (min %.2f)",
             inc, worst_ratio, b, r2, kR2Min));
  });

  guard(8, "realizer", [&] {
    Clock c;
    const auto nu = build_mu_i(su.cfg, su.sc.I, kP0);
    AffineCell cell;
    cell.poly = unit_square();
    cell.G = to_mat(nu.root.X);
    RealizeReport rep;
    const auto m = realize_laminate(cell, nu, 0, kEta, 1e300, &rep, {});
    const auto mc = check_map(m);
    const auto k = split_coeffs(su.cfg, su.sc.I, kP0);
    const double want[] = {k.l1, k.l2, k.l3};
    const Kind kinds[] = {Kind::B, Kind::D, Kind::E};
    double frac = 0;
    for (int a = 0; a < 3; ++a)
      frac = std::max(frac, std::fabs(rep.fractions[nu.find(family_matrix(su.cfg, kinds[a], su.sc.I, kP0))] - want[a]));
    const auto sr = realize_scheme(Scheme{su, {}}, kP0, 2, {});
    const double t = c.s();
    line(8, "realizer", frac <= kEta && mc.boundary_error <= kExact && mc.continuity_error <= kExact &&
                            sr.max_histogram_error <= kHistTol && t < kTime8,
         fmt("depth 1: %zu cells, fraction error %.4f (tol %.2f), boundary %.2g, continuity %.2g (tol %.0e); depth 2: "
             "%zu cells, histogram error %.4f (tol %.2f); %.3f s",
             m.cells.size(), frac, kEta, mc.boundary_error, mc.continuity_error, kExact, sr.map.cells.size(),
             sr.max_histogram_error, kHistTol, t));
  });

  guard(9, "regularity calculators", [&] {
    Clock c;
    const auto b = bootstrap_exponents({3, 2, 0.5});
    const bool boot = b.exponents == std::vector<double>{2, 4, 6};
    const PinchInput pin{2, 0.9, 1};
    const auto p = pinching_beta(pin);
    const double q = p.ok ? std::max(std::fabs(pinching_quadratic(pin, p.lo)), std::fabs(pinching_quadratic(pin, p.hi))) : 1e300;
    const auto f = pinching_beta({2, 0.7, 1});
    const bool fails_right = !f.ok && 1.0 * 1.0 * (1 - 0.5) >= 0.7 * 0.7;
    int hold = 0;
    for (unsigned s = 0; s < 100; ++s) {
      const std::array<int, 2> sg{s % 2 ? 1 : -1, (s / 2) % 2 ? 1 : -1};
      const auto gf = random_monotone_sample(1000 + s, 41, sg);
      std::array<double, 2> L{1e300, 1e300};
      for (int j = 0; j + 1 < gf.ny; ++j)
        for (int i = 0; i + 1 < gf.nx; ++i) {
          L[0] = std::min(L[0], sg[0] * (gf.at(i + 1, j) - gf.at(i, j)) / gf.h);
          L[1] = std::min(L[1], sg[1] * (gf.at(i, j + 1) - gf.at(i, j)) / gf.h);
        }
      hold += discrete_lemma41(gf, sg, L, 0.1).holds;
    }
    const double t = c.s();
    line(9, "regularity calculators", boot && q <= kPinchTol && fails_right && hold == 100 && t < kTime9,
         fmt("bootstrap [2,4,6] %d; pinching (2,0.9,1) window (%.6f, %.6f), |q| at endpoints %.2g (tol %.0e); "
             "(2,0.7,1) rejected %d; discrete inequality holds %d/100; %.3f s",
             boot, p.lo, p.hi, q, kPinchTol, fails_right, hold, t));
  });

  guard(10, "determinism", [&] {
    bool same = true;
    std::string how;
    if (!cli.empty()) {
      const auto base = fs::temp_directory_path();
      const auto d1 = base / "stairlam_acc_det1", d2 = base / "stairlam_acc_det2";
      fs::remove_all(d1);
      fs::remove_all(d2);
      const std::string args = " simulate --p 1.2 --delta 0.02 -L 40 > /dev/null -o ";
      const int r1 = std::system((cli + args + d1.string()).c_str());
      const int r2 = std::system((cli + args + d2.string()).c_str());
      same = r1 == 0 && r2 == 0;
      for (const char* f : {"stages.csv", "summary.json", "constants.json"})
        same = same && read_text((d1 / f).string()) == read_text((d2 / f).string());
      how = "two CLI simulate runs, stages.csv summary.json constants.json";
    } else {
      auto once = [&] {
        const auto s = certify_setup(kProfile, kP, kDelta);
        const auto r = run(Scheme{s, {}}, kP0, 40);
        return stages_csv(r.stages) + summary_json(r, s).dump(2) +
               constants_report(s, verify_schedule(s.sc, 50)).dump(2);
      };
      same = once() == once();
      how = "two in-process runs (CLI path not given)";
    }
    line(10, "determinism", same, fmt("%s byte-identical: %d", how.c_str(), same));
  });

  std::printf("acceptance: %d of 10 criteria failed\n", failures);
  return failures ? 1 : 0;
}

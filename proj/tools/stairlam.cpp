// Command-line front end.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "stairlam/io.hpp"

using namespace stairlam;
namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::string config;
  std::optional<double> lambda, Lambda, sharpness, p, delta, a0p, a0m, b, r_cap, eta, theta;
  std::optional<int> L, depth;
  std::optional<std::string> out, precision;
};

void add_config_flags(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON config file");
  app->add_option("--lambda", o.lambda);
  app->add_option("--Lambda", o.Lambda);
  app->add_option("--sharpness", o.sharpness);
  app->add_option("--p", o.p);
  app->add_option("--delta", o.delta);
  app->add_option("--a0p", o.a0p);
  app->add_option("--a0m", o.a0m);
  app->add_option("--b", o.b);
  app->add_option("--r-cap", o.r_cap);
  app->add_option("--eta", o.eta);
  app->add_option("--theta", o.theta);
  app->add_option("-L,--stages", o.L);
  app->add_option("--depth", o.depth, "realization depth (1-4)");
  app->add_option("-o,--out", o.out, "output directory (overrides STAIRLAM_OUT)");
  app->add_option("--precision", o.precision, "double | extended");
}

// defaults < config file < STAIRLAM_OUT < flags
RunConfig resolve(const Overrides& o) {
  RunConfig c;
  if (!o.config.empty()) c = load_config(o.config, c);
  if (const char* env = std::getenv("STAIRLAM_OUT"); env && *env) c.out_dir = env;
  auto set = [](auto& dst, const auto& src) {
    if (src) dst = *src;
  };
  set(c.lambda, o.lambda);
  set(c.Lambda, o.Lambda);
  set(c.sharpness, o.sharpness);
  if (o.p) c.p = o.p;
  if (o.delta) c.delta = o.delta;
  set(c.P0.a0p, o.a0p);
  set(c.P0.a0m, o.a0m);
  set(c.P0.b, o.b);
  set(c.certify.r_cap, o.r_cap);
  set(c.osc.eta, o.eta);
  set(c.osc.theta, o.theta);
  set(c.L, o.L);
  set(c.realize_depth, o.depth);
  set(c.out_dir, o.out);
  set(c.precision, o.precision);
  c.validate();
  return c;
}

std::string out_path(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return (fs::path(c.out_dir) / name).string();
}

Setup setup_of(const RunConfig& c) { return certify_setup(c.profile(), c.p_value(), c.delta_value(), c.certify); }

void emit(const RunConfig& c, const std::string& name, const std::string& text) {
  const auto path = out_path(c, name);
  write_text(path, text);
  std::cout << "wrote " << path << "\n";
}

int cmd_constants(const RunConfig& c) {
  const Setup su = setup_of(c);
  const auto sched = verify_schedule(su.sc, std::max(50, c.L));
  const json rep = constants_report(su, sched);
  emit(c, "constants.json", rep.dump(2) + "\n");
  std::printf("r=%.6g I0=%d I1=%d T0=%.6g T0'=%.6g I=%d N=%d C_rp=%.6g C~=%.6g\n", su.sc.r, su.sc.I0, su.sc.I1, su.sc.T0,
              su.sc.T0prime, su.sc.I, su.sc.N, su.sc.Crp, su.sc.Ctilde);
  if (!rep["margins_positive"].get<bool>()) {
    std::cerr << "a certified margin is not positive\n";
    return 1;
  }
  return 0;
}

int cmd_simulate(const RunConfig& c) {
  const Setup su = setup_of(c);
  const auto sched = verify_schedule(su.sc, std::max(50, c.L));
  emit(c, "constants.json", constants_report(su, sched).dump(2) + "\n");
  const Scheme s{su, {}};
  const RunResult res = run(s, c.P0, c.L);
  emit(c, "stages.csv", stages_csv(res.stages));
  emit(c, "summary.json", summary_json(res, su).dump(2) + "\n");
  const auto& m = res.summary;
  std::printf("stages=%d bounds_ok=%d Sp_max=%.6g energy_increasing=%d mass_error=%.3g\n", c.L, m.bounds_ok, m.Sp_max,
              m.energy_increasing, m.max_mass_error);
  if (!m.bounds_ok || !sched.ok) {
    for (const auto& st : res.stages)
      for (const auto& v : st.violations) std::cerr << "violation " << v.what << " at stage " << v.l << " band " << v.j << "\n";
    for (const auto& v : sched.violations) std::cerr << "schedule violation " << v.what << " at l=" << v.l << "\n";
    return 1;
  }
  return 0;
}

int cmd_realize(const RunConfig& c, double hist_tol) {
  const Setup su = setup_of(c);
  const Scheme s{su, {}};
  const auto sr = realize_scheme(s, c.P0, c.realize_depth, c.osc);
  const auto mc = check_map(sr.map);
  emit(c, "mesh.json", mesh_to_json(sr.map).dump() + "\n");
  emit(c, "laminate.json",
       to_json(build_mu_interp(su.cfg, su.sc.I, su.sc.I + 1, s.blend(1), c.P0)).dump(2) + "\n");
  json hist = json::array();
  for (const auto& h : sr.histogram)
    hist.push_back({{"kind", to_string(h.kind)}, {"index", h.index}, {"area_fraction", h.area_fraction}, {"sim_mass", h.sim_mass}});
  const double tol = hist_tol > 0 ? hist_tol : (c.realize_depth == 1 ? c.osc.eta : 0.07);
  const bool ok = sr.max_histogram_error <= tol && mc.boundary_error <= 1e-9 && mc.continuity_error <= 1e-9 &&
                  mc.tiling_error <= 1e-9;
  json rep{{"depth", c.realize_depth},
           {"cells", sr.map.cells.size()},
           {"histogram", hist},
           {"max_histogram_error", sr.max_histogram_error},
           {"histogram_tolerance", tol},
           {"unclassified_fraction", sr.unclassified_fraction},
           {"mean_diameter", sr.mean_diameter},
           {"tiling_error", mc.tiling_error},
           {"continuity_error", mc.continuity_error},
           {"boundary_error", mc.boundary_error},
           {"sup_deviation", mc.sup_deviation},
           {"antisym_fraction", mc.antisym_fraction},
           {"ok", ok}};
  emit(c, "realize.json", rep.dump(2) + "\n");
  std::printf("cells=%zu histogram_error=%.4g (tol %.3g) continuity=%.3g boundary=%.3g\n", sr.map.cells.size(),
              sr.max_histogram_error, tol, mc.continuity_error, mc.boundary_error);
  return ok ? 0 : 1;
}

int cmd_verify(const RunConfig& c, const std::string& file) {
  Laminate nu;
  if (!file.empty()) {
    try {
      nu = laminate_from_json(json::parse(read_text(file)));
    } catch (const json::exception& e) {
      throw InputError("cannot parse " + file + ": " + e.what());
    }
  } else {
    const Setup su = setup_of(c);
    nu = build_mu_i(su.cfg, su.sc.I, c.P0);
    emit(c, "laminate.json", to_json(nu).dump(2) + "\n");
  }
  const auto rep = validate(nu);
  if (!rep.ok) {
    std::cerr << "laminate invalid (" << rep.stage << "): " << rep.message << "\n";
    return 1;
  }
  std::printf("laminate valid: %zu atoms, %zu splits\n", nu.atoms.size(), nu.certificate.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stairlam: staircase laminates, convex-integration scheme and regularity calculators"};
  app.require_subcommand(1);
  Overrides o;
  double hist_tol = 0;
  std::string lam_file;

  auto* c_const = app.add_subcommand("constants", "select and certify all constants; writes constants.json");
  auto* c_sim = app.add_subcommand("simulate", "run the scheme; writes stages.csv and summary.json");
  auto* c_real = app.add_subcommand("realize", "piecewise-affine realization; writes mesh.json and realize.json");
  auto* c_ver = app.add_subcommand("verify", "validate a laminate file (or the constructor output)");
  for (auto* sc : {c_const, c_sim, c_real, c_ver}) add_config_flags(sc, o);
  c_real->add_option("--hist-tol", hist_tol, "histogram tolerance (default eta at depth 1, 0.07 deeper)");
  c_ver->add_option("laminate", lam_file, "laminate.json to validate");

  auto* c_reg = app.add_subcommand("regularity", "exponent bootstrap, pinching window, discrete one-sided-bound check");
  c_reg->require_subcommand(1);
  std::string reg_out;
  c_reg->add_option("-o,--out", reg_out, "output directory");
  int bn = 3;
  double bp = 2, bg = 0.5;
  auto* r_boot = c_reg->add_subcommand("bootstrap", "exponent sequence up to p*");
  r_boot->add_option("n", bn)->required();
  r_boot->add_option("p", bp)->required();
  r_boot->add_option("gamma", bg)->required();
  int pn = 2;
  double pl = 0.9, pL = 1;
  auto* r_pin = c_reg->add_subcommand("pinching", "admissible beta window");
  r_pin->add_option("n", pn)->required();
  r_pin->add_option("lambda", pl)->required();
  r_pin->add_option("Lambda", pL)->required();
  int samples = 100, nodes = 41;
  unsigned seed = 1;
  double eps = 0.1;
  std::string func = "random";
  auto* r_lem = c_reg->add_subcommand("lemma41", "discrete mollified gradient inequality");
  r_lem->add_option("--function", func, "random | cubic")->check(CLI::IsMember({"random", "cubic"}));
  r_lem->add_option("--samples", samples);
  r_lem->add_option("--seed", seed);
  r_lem->add_option("--nodes", nodes);
  r_lem->add_option("--eps", eps);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (c_reg->parsed()) {
      RunConfig rc;
      if (const char* env = std::getenv("STAIRLAM_OUT"); env && *env) rc.out_dir = env;
      if (!reg_out.empty()) rc.out_dir = reg_out;
      if (r_boot->parsed()) {
        const auto r = bootstrap_exponents({bn, bp, bg});
        emit(rc, "bootstrap.json",
             json{{"n", bn}, {"p", bp}, {"gamma", bg}, {"p_star", BootstrapInput{bn, bp, bg}.p_star()}, {"exponents", r.exponents}, {"steps", r.steps}}
                     .dump(2) + "\n");
        for (double q : r.exponents) std::printf("%.17g\n", q);
        return 0;
      }
      if (r_pin->parsed()) {
        const auto r = pinching_beta({pn, pl, pL});
        json j{{"n", pn}, {"lambda", pl}, {"Lambda", pL}, {"ok", r.ok}};
        if (r.ok) {
          j["lo"] = r.lo;
          j["hi"] = std::isinf(r.hi) ? json("inf") : json(r.hi);
        } else {
          j["failure"] = r.failure;
        }
        emit(rc, "pinching.json", j.dump(2) + "\n");
        if (!r.ok) {
          std::cerr << r.failure << "\n";
          return 1;
        }
        std::printf("beta in (%.17g, %.17g)\n", r.lo, r.hi);
        return 0;
      }
      // lemma41
      Lemma41Report worst;
      bool holds = true;
      int failures = 0;
      json trials = json::array();
      const int count = func == "cubic" ? 1 : samples;
      for (int t = 0; t < count; ++t) {
        GridFunction g;
        std::array<int, 2> sigma{1, 1};
        std::array<double, 2> L{0, 1};
        if (func == "cubic") {
          g.nx = g.ny = nodes;
          g.h = 1.0 / (nodes - 1);
          g.x0 = g.y0 = 1;
          g.u.resize(static_cast<size_t>(nodes) * nodes);
          for (int j = 0; j < nodes; ++j)
            for (int i = 0; i < nodes; ++i) {
              const double x = 1 + i * g.h, y = 1 + j * g.h;
              g.u[static_cast<size_t>(j) * nodes + i] = x * x * x + y;
            }
        } else {
          sigma = {(seed + t) % 2 ? 1 : -1, ((seed + t) / 2) % 2 ? 1 : -1};
          g = random_monotone_sample(seed + t, nodes, sigma);
          // tightest admissible bounds
          L = {1e300, 1e300};
          for (int j = 0; j + 1 < g.ny; ++j)
            for (int i = 0; i + 1 < g.nx; ++i) {
              L[0] = std::min(L[0], sigma[0] * (g.at(i + 1, j) - g.at(i, j)) / g.h);
              L[1] = std::min(L[1], sigma[1] * (g.at(i, j + 1) - g.at(i, j)) / g.h);
            }
        }
        const auto rep = discrete_lemma41(g, sigma, L, eps);
        trials.push_back({{"trial", t}, {"holds", rep.holds}, {"min_slack", rep.min_slack}, {"max_slack", rep.max_slack}});
        if (!rep.holds) ++failures;
        holds = holds && rep.holds;
        if (t == 0 || rep.min_slack < worst.min_slack) worst = rep;
      }
      emit(rc, "lemma41.csv", lemma41_csv(worst));
      emit(rc, "lemma41.json", json{{"function", func}, {"trials", trials}, {"holds", holds}, {"failures", failures}}.dump(2) + "\n");
      std::printf("%d/%d trials hold; worst min slack %.6g\n", count - failures, count, worst.min_slack);
      return holds ? 0 : 1;
    }

    const RunConfig cfg = resolve(o);
    if (c_const->parsed()) return cmd_constants(cfg);
    if (c_sim->parsed()) return cmd_simulate(cfg);
    if (c_real->parsed()) return cmd_realize(cfg, hist_tol);
    if (c_ver->parsed()) return cmd_verify(cfg, lam_file);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const BudgetError& e) {
    std::cerr << "budget exhausted: " << e.what() << "\n";
    return 3;
  } catch (const InfeasibleError& e) {
    std::cerr << "budget exhausted: " << e.what() << "\n";
    return 3;
  } catch (const CapError& e) {
    std::cerr << "budget exhausted: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "violation: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

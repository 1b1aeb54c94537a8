#include "stairlam/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace stairlam {

double RunConfig::p_value() const { return p ? *p : 0.99 * p_critical(lambda, Lambda); }

double RunConfig::delta_value() const {
  return delta ? *delta : (p_critical(lambda, Lambda) - p_value()) / 20;
}

void RunConfig::validate() const {
  profile().validate();
  if (!P0.in_box()) throw ConfigError("P0 must lie in the open box (1,2)x(1,2)x(-1,1)");
  if (L < 1 || L > 100000) throw ConfigError("L must lie in [1, 100000]");
  if (realize_depth < 1 || realize_depth > 4) throw ConfigError("realize_depth must lie in [1,4]");
  if (precision != "double" && precision != "extended") throw ConfigError("precision must be double or extended");
  if (!(osc.theta > 0 && osc.theta <= 1)) throw ConfigError("osc.theta must lie in (0,1]");
  if (!(osc.eta > 0 && osc.eta < 1)) throw ConfigError("osc.eta must lie in (0,1)");
  if (!(osc.sup_step > 0) || !(osc.min_area >= 0) || osc.max_periods < 1 || !(osc.layer_cap > 0))
    throw ConfigError("invalid oscillation parameters");
  if (!(certify.r_cap > 1 && certify.r_cap < 2)) throw ConfigError("r_cap must lie in (1,2)");
  if (certify.horizon < 1 || certify.max_index < 1 || certify.box_budget < 1 || certify.distance_cutoff < 1)
    throw ConfigError("certification budgets must be positive");
  if (!(delta_value() > 0)) throw ConfigError("delta must be positive");
  StairConfig{profile(), std::min(1.5, certify.r_cap), p_value(), delta_value()}.validate();
  if (out_dir.empty()) throw ConfigError("output directory must be nonempty");
}

namespace {

template <class T>
void take(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

json mat_json(const SymMatrix2& X) { return json::array({X.a11, X.a12, X.a22}); }
SymMatrix2 mat_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InputError("matrix must be [a11, a12, a22]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void apply_json(RunConfig& cfg, const json& j) {
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j, {"lambda", "Lambda", "sharpness", "p", "delta", "P0", "L", "realize_depth", "osc", "certify",
                       "out_dir", "precision"},
                   "config");
    take(j, "lambda", cfg.lambda);
    take(j, "Lambda", cfg.Lambda);
    take(j, "sharpness", cfg.sharpness);
    if (j.contains("p")) cfg.p = j.at("p").is_null() ? std::nullopt : std::optional(j.at("p").get<double>());
    if (j.contains("delta"))
      cfg.delta = j.at("delta").is_null() ? std::nullopt : std::optional(j.at("delta").get<double>());
    if (j.contains("P0")) {
      const auto& q = j.at("P0");
      reject_unknown(q, {"a0p", "a0m", "b"}, "P0");
      take(q, "a0p", cfg.P0.a0p);
      take(q, "a0m", cfg.P0.a0m);
      take(q, "b", cfg.P0.b);
    }
    take(j, "L", cfg.L);
    take(j, "realize_depth", cfg.realize_depth);
    if (j.contains("osc")) {
      const auto& o = j.at("osc");
      reject_unknown(o, {"theta", "eta", "sup_step", "max_periods", "min_area", "layer_cap"}, "osc");
      take(o, "theta", cfg.osc.theta);
      take(o, "eta", cfg.osc.eta);
      take(o, "sup_step", cfg.osc.sup_step);
      take(o, "max_periods", cfg.osc.max_periods);
      take(o, "min_area", cfg.osc.min_area);
      take(o, "layer_cap", cfg.osc.layer_cap);
    }
    if (j.contains("certify")) {
      const auto& c = j.at("certify");
      reject_unknown(c, {"horizon", "max_index", "box_budget", "r_cap", "distance_cutoff"}, "certify");
      take(c, "horizon", cfg.certify.horizon);
      take(c, "max_index", cfg.certify.max_index);
      take(c, "box_budget", cfg.certify.box_budget);
      take(c, "r_cap", cfg.certify.r_cap);
      take(c, "distance_cutoff", cfg.certify.distance_cutoff);
    }
    take(j, "out_dir", cfg.out_dir);
    take(j, "precision", cfg.precision);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

RunConfig load_config(const std::string& path, RunConfig base) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  apply_json(base, j);
  return base;
}

json to_json(const RunConfig& c) {
  return {{"lambda", c.lambda},
          {"Lambda", c.Lambda},
          {"sharpness", c.sharpness},
          {"p", c.p_value()},
          {"delta", c.delta_value()},
          {"P0", {{"a0p", c.P0.a0p}, {"a0m", c.P0.a0m}, {"b", c.P0.b}}},
          {"L", c.L},
          {"realize_depth", c.realize_depth},
          {"osc",
           {{"theta", c.osc.theta},
            {"eta", c.osc.eta},
            {"sup_step", c.osc.sup_step},
            {"max_periods", c.osc.max_periods},
            {"min_area", c.osc.min_area},
            {"layer_cap", c.osc.layer_cap}}},
          {"certify",
           {{"horizon", c.certify.horizon},
            {"max_index", c.certify.max_index},
            {"box_budget", c.certify.box_budget},
            {"r_cap", c.certify.r_cap},
            {"distance_cutoff", c.certify.distance_cutoff}}},
          {"out_dir", c.out_dir},
          {"precision", c.precision}};
}

json tag_to_json(const AtomTag& t) {
  json j{{"kind", to_string(t.kind)}, {"index", t.index}};
  // long double kept exactly as text
  if (t.log_deficit) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.21Lg", *t.log_deficit);
    j["log_deficit"] = buf;
  }
  return j;
}

AtomTag tag_from_json(const json& j) {
  AtomTag t;
  t.kind = kind_from_string(j.at("kind").get<std::string>());
  t.index = j.at("index").get<int>();
  if (j.contains("log_deficit")) {
    const auto& v = j.at("log_deficit");
    t.log_deficit = v.is_string() ? std::strtold(v.get<std::string>().c_str(), nullptr) : v.get<double>();
  }
  return t;
}

json to_json(const Laminate& nu) {
  auto atom = [](const Atom& a) { return json{{"weight", a.weight}, {"X", mat_json(a.X)}, {"tag", tag_to_json(a.tag)}}; };
  json j{{"root", atom(nu.root)}, {"atoms", json::array()}, {"certificate", json::array()}};
  for (const auto& a : nu.atoms) j["atoms"].push_back(atom(a));
  for (const auto& s : nu.certificate)
    j["certificate"].push_back({{"atom", s.atom},
                                {"B1", mat_json(s.B1)},
                                {"B2", mat_json(s.B2)},
                                {"s", s.s},
                                {"fraction", s.fraction},
                                {"tag1", tag_to_json(s.tag1)},
                                {"tag2", tag_to_json(s.tag2)}});
  return j;
}

Laminate laminate_from_json(const json& j) {
  try {
    auto atom = [](const json& a) { return Atom{a.at("weight").get<double>(), mat_from(a.at("X")), tag_from_json(a.at("tag"))}; };
    Laminate nu;
    nu.root = atom(j.at("root"));
    for (const auto& a : j.at("atoms")) nu.atoms.push_back(atom(a));
    for (const auto& s : j.at("certificate"))
      nu.certificate.push_back({s.at("atom").get<int>(), mat_from(s.at("B1")), mat_from(s.at("B2")), s.at("s").get<double>(),
                                s.at("fraction").get<double>(), tag_from_json(s.at("tag1")), tag_from_json(s.at("tag2"))});
    return nu;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed laminate file: ") + e.what());
  } catch (const ConfigError& e) {
    throw InputError(std::string("malformed laminate file: ") + e.what());
  }
}

json constants_report(const Setup& su, const ScheduleReport& sched) {
  const auto& k = su.sc;
  const auto& cfg = su.cfg;
  json margins{{"bracket_lower", su.rsel.worst_lower},
               {"bracket_upper", su.rsel.worst_upper},
               {"T0_lower", su.t0sel.worst_lower},
               {"T0_upper", su.t0sel.worst_upper},
               {"log_r_L_minus_p_2delta", su.rsel.log_r_L - (k.p + 2 * k.delta)},
               {"distance", su.isel.distance.value},
               {"I_power", static_cast<double>(sched.margin_I)},
               {"N", static_cast<double>(sched.margin_N)},
               {"seq_lower_bound", static_cast<double>(sched.min_margin_seq)},
               {"difficult", static_cast<double>(sched.min_margin_difficult)},
               {"easy", static_cast<double>(sched.margin_easy)}};
  bool positive = true;
  for (auto it = margins.begin(); it != margins.end(); ++it) positive = positive && it->get<double>() > 0;
  const auto& d = su.isel.distance;
  return {{"lambda", cfg.profile.lambda},
          {"Lambda", cfg.profile.Lambda},
          {"sharpness", cfg.profile.sharpness},
          {"p_crit", p_critical(cfg.profile.lambda, cfg.profile.Lambda)},
          {"p", k.p},
          {"delta", k.delta},
          {"r", k.r},
          {"log_r_L", su.rsel.log_r_L},
          {"I0", k.I0},
          {"I1", k.I1},
          {"T0", k.T0},
          {"T0prime", k.T0prime},
          {"I", k.I},
          {"I_min_power", su.isel.I_min_power},
          {"N", k.N},
          {"Crp", k.Crp},
          {"Crp_argmax", k.Crp_argmax},
          {"Ctilde", k.Ctilde},
          {"standing_assumption", cfg.standing_assumption()},
          {"distance_certificate",
           {{"value", d.value},
            {"pairwise_min", d.pairwise_min},
            {"tail_v_w1", d.tail_v_w1},
            {"tail_v_w2", d.tail_v_w2},
            {"v_a22_floor", d.v_a22_floor},
            {"cutoff", d.cutoff}}},
          {"schedule_checked_to", sched.l_max},
          {"schedule_ok", sched.ok},
          {"margins", margins},
          {"margins_positive", positive}};
}

std::string stages_csv(const std::vector<StageReport>& stages) {
  std::ostringstream os;
  os << "stage,band,Q_mass,Q_lower,Q_upper,V_mass,V_lower,V_upper,S1,Sp,S2,energy,max_kf_residual\n";
  auto tail = [&](const StageReport& s) {
    return g17(s.V_mass) + "," + g17(s.V_lower) + "," + g17(s.V_upper) + "," + g17(s.S1) + "," + g17(s.Sp) + "," +
           g17(s.S2) + "," + g17(s.energy) + "," + g17(s.max_kf_residual);
  };
  for (const auto& s : stages) {
    if (s.bands.empty()) os << s.stage << ",0,,,," << tail(s) << "\n";
    for (const auto& b : s.bands)
      os << s.stage << "," << b.j << "," << g17(b.Q) << "," << g17(b.lower) << "," << g17(b.upper) << "," << tail(s)
         << "\n";
  }
  return os.str();
}

json summary_json(const RunResult& res, const Setup& su) {
  const auto& m = res.summary;
  json viol = json::array();
  for (const auto& s : res.stages)
    for (const auto& v : s.violations) viol.push_back({{"what", v.what}, {"l", v.l}, {"j", v.j}});
  json kf = json::array();
  for (const auto& s : res.stages)
    kf.push_back({{"stage", s.stage}, {"max", s.max_kf_residual}, {"budget", s.kf_budget}, {"within", s.kf_within_budget}});
  json energy = json::array();
  for (const auto& s : res.stages) energy.push_back(s.energy);
  return {{"stages", res.stages.empty() ? 0 : res.stages.back().stage},
          {"r", su.sc.r},
          {"I", su.sc.I},
          {"N", su.sc.N},
          {"bounds_ok", m.bounds_ok},
          {"violations", viol},
          {"Sp_max", m.Sp_max},
          {"S1_max", m.S1_max},
          {"Sp_stage30", m.Sp_stage30},
          {"Sp_last10_max", m.Sp_last10_max},
          {"Sp_rel_change", m.Sp_rel_change},
          {"envelope_C", m.envelope_C},
          {"Sp_envelope_bound", m.Sp_envelope_bound},
          {"Sp_below_envelope", m.Sp_below_envelope},
          {"energy", energy},
          {"energy_increasing", m.energy_increasing},
          {"energy_fit_slope", m.energy_fit_slope},
          {"energy_fit_r2", m.energy_fit_r2},
          {"energy_above_linear", m.energy_above_linear},
          {"max_mass_error", m.max_mass_error},
          {"final_cells", res.final.cells.size()},
          {"kf_residual", kf}};
}

std::string cell_tag(const AffineCell& c) {
  if (c.label) return to_string(c.label->kind == Kind::A ? Kind::V : c.label->kind) + ":" + std::to_string(c.label->index);
  return c.atom == -1 ? "layer" : "unrealized";
}

json mesh_to_json(const PAMap& map) {
  std::map<Vec2, size_t> ids;
  json verts = json::array(), cells = json::array();
  for (const auto& c : map.cells) {
    json vi = json::array();
    for (const auto& v : c.poly) {
      auto [it, fresh] = ids.try_emplace(v, ids.size());
      if (fresh) verts.push_back({v[0], v[1]});
      vi.push_back(it->second);
    }
    cells.push_back({{"verts", vi}, {"G", {c.G[0], c.G[1], c.G[2], c.G[3]}}, {"c", {c.c[0], c.c[1]}}, {"tag", cell_tag(c)}});
  }
  json dom = json::array();
  for (const auto& v : map.domain) dom.push_back({v[0], v[1]});
  return {{"vertices", verts},
          {"cells", cells},
          {"domain", dom},
          {"boundary", {{"G0", {map.G0[0], map.G0[1], map.G0[2], map.G0[3]}}, {"c0", {map.c0[0], map.c0[1]}}}}};
}

PAMap mesh_from_json(const json& j) {
  try {
    PAMap m;
    std::vector<Vec2> V;
    for (const auto& v : j.at("vertices")) V.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    auto mat4 = [](const json& g) { return Mat2{g.at(0).get<double>(), g.at(1).get<double>(), g.at(2).get<double>(), g.at(3).get<double>()}; };
    auto vec2 = [](const json& g) { return Vec2{g.at(0).get<double>(), g.at(1).get<double>()}; };
    for (const auto& c : j.at("cells")) {
      AffineCell cell;
      for (const auto& k : c.at("verts")) cell.poly.push_back(V.at(k.get<size_t>()));
      cell.G = mat4(c.at("G"));
      cell.c = c.contains("c") ? vec2(c.at("c")) : Vec2{0, 0};
      const std::string tag = c.at("tag").get<std::string>();
      const auto colon = tag.find(':');
      if (colon != std::string::npos) {
        cell.label = AtomTag{kind_from_string(tag.substr(0, colon)), std::stoi(tag.substr(colon + 1)), std::nullopt};
        cell.atom = 0;
      } else {
        cell.atom = tag == "layer" ? -1 : -2;
      }
      m.cells.push_back(std::move(cell));
    }
    if (j.contains("domain"))
      for (const auto& v : j.at("domain")) m.domain.push_back(vec2(v));
    else
      m.domain = unit_square();
    m.G0 = mat4(j.at("boundary").at("G0"));
    m.c0 = vec2(j.at("boundary").at("c0"));
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed mesh file: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw InputError(std::string("mesh references a missing vertex: ") + e.what());
  }
}

std::string lemma41_csv(const Lemma41Report& rep) {
  std::ostringstream os;
  os << "i,j,lhs,rhs,slack\n";
  for (const auto& r : rep.rows) os << r.i << "," << r.j << "," << g17(r.lhs) << "," << g17(r.rhs) << "," << g17(r.slack) << "\n";
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << text;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace stairlam

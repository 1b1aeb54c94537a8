#pragma once
// File formats and run configuration.

#include <optional>
#include <string>

#include <json.hpp>

#include "stairlam/realizer.hpp"
#include "stairlam/regularity.hpp"

namespace stairlam {

using nlohmann::json;

struct RunConfig {
  double lambda = 1, Lambda = 4, sharpness = 1;
  std::optional<double> p, delta;
  ParamPoint P0{1.5, 1.5, 0.0};
  int L = 40;
  int realize_depth = 1;
  OscParams osc;
  CertifyOptions certify;
  std::string out_dir = "out";
  std::string precision = "double";  //!< double | extended

  ProfileConfig profile() const { return {lambda, Lambda, sharpness}; }
  double p_value() const;      //!< explicit p or 0.99 p_crit
  double delta_value() const;  //!< explicit delta or (p_crit - p)/20
  void validate() const;       //!< throws ConfigError
};

//! Overlays the fields present in j onto cfg; unknown keys are rejected.
void apply_json(RunConfig& cfg, const json& j);
RunConfig load_config(const std::string& path, RunConfig base = {});
json to_json(const RunConfig& cfg);

json tag_to_json(const AtomTag& t);
AtomTag tag_from_json(const json& j);
json to_json(const Laminate& nu);
Laminate laminate_from_json(const json& j);

json constants_report(const Setup& su, const ScheduleReport& sched);

//! One row per (stage, band); fields printed with %.17g.
std::string stages_csv(const std::vector<StageReport>& stages);
json summary_json(const RunResult& res, const Setup& su);

std::string cell_tag(const AffineCell& c);
json mesh_to_json(const PAMap& map);
PAMap mesh_from_json(const json& j);

std::string lemma41_csv(const Lemma41Report& rep);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace stairlam

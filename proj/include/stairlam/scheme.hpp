#pragma once
// The convex-integration iteration executed on gradient distributions: each stage
// replaces every cell class by the atoms of its interpolation or correction laminate.

#include <string>
#include <vector>

#include "stairlam/laminate.hpp"
#include "stairlam/schedule.hpp"

namespace stairlam {

struct CellClass {
  Kind kind = Kind::V;  //!< W1, W2 or V
  int index = 0;
  SymMatrix2 X;
  ParamPoint P;
  double mass = 1;
};

struct CellEnsemble {
  int stage = 0;
  std::vector<CellClass> cells;
  double total_mass() const;
};

struct Scheme {
  Setup setup;
  LogDeficitFn schedule;  //!< empty: the certified t_l

  long double log_deficit(int l) const;
  Blend blend(int l) const { return Blend::from_log_deficit(log_deficit(l)); }
};

CellEnsemble init(const Scheme& s, const ParamPoint& P0);
CellEnsemble step(const CellEnsemble& ens, const Scheme& s);

struct BandReport {
  int j = 0;
  double Q = 0, lower = 0, upper = 0;
};

struct StageViolation {
  std::string what;  //!< band-lower | band-upper | V-lower | V-upper | mass | support
  int l = 0, j = 0;
};

struct StageReport {
  int stage = 0;
  std::vector<BandReport> bands;
  double V_mass = 0, V_lower = 0, V_upper = 0;
  double S1 = 0, Sp = 0, S2 = 0, energy = 0;
  double total_mass = 0;
  double max_kf_residual = 0, kf_budget = 0;
  bool kf_within_budget = true;
  std::vector<std::pair<int, double>> kf_histogram;  //!< (floor log10 residual, mass) over W cells
  size_t cells = 0;
  std::vector<StageViolation> violations;
};

StageReport diagnostics(const CellEnsemble& ens, const Scheme& s);

struct RunSummary {
  bool bounds_ok = true;
  double Sp_max = 0, S1_max = 0;
  double Sp_stage30 = 0, Sp_last10_max = 0, Sp_rel_change = 0;  //!< filled when the run reaches stage 40
  double envelope_C = 0, Sp_envelope_bound = 0;
  bool Sp_below_envelope = true;
  bool energy_increasing = true;
  double energy_fit_slope = 0, energy_fit_r2 = 0;  //!< least squares over stages 5..L
  bool energy_above_linear = true;                 //!< E_l >= 0.9 (1 - r^{-p}) r^{2I} l on 5..L
  double max_mass_error = 0;
};

struct RunResult {
  std::vector<StageReport> stages;
  CellEnsemble final;
  RunSummary summary;
};

RunResult run(const Scheme& s, const ParamPoint& P0, int L);
RunSummary summarize(const std::vector<StageReport>& stages, const Scheme& s);

}  // namespace stairlam

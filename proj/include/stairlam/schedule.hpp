#pragma once
// The sequences delta_l, t_l and the constants C_{r,p}, C~, N, with log-space
// verification of the schedule inequalities.

#include <functional>
#include <string>
#include <vector>

#include "stairlam/certify.hpp"

namespace stairlam {

struct ScheduleConstants {
  double p = 0, delta = 0, r = 0;
  int I0 = 0, I1 = 0;
  double T0 = 0, T0prime = 0;
  int I = 0, N = 0;
  double Crp = 0;
  int Crp_argmax = 0;
  double Ctilde = 0;
};

struct TDeficit {
  long double log_deficit = 0;
  int l = 0;
  Blend blend() const { return Blend::from_log_deficit(log_deficit); }
};

struct CrpResult {
  double Crp = 0;
  int argmax = 0;
};

CrpResult compute_Crp(double r, double p);
double delta_seq(double delta, int l);
double compute_Ctilde(double r, double p, double delta);
TDeficit t_seq(const ScheduleConstants& k, int l);
//! Smallest N with N >= log_r(2 C~ C_{r,p}) and t_1 >= max(0.9, T0, T0').
int choose_N(const ScheduleConstants& partial);

//! Any schedule given as l -> ln(1 - t_l); defaults to t_seq.
using LogDeficitFn = std::function<long double(int)>;

struct ScheduleViolation {
  std::string what;  //!< SeqLowerBound | Difficult | Easy | NBound | IPower | Monotone
  int l = 0, j = 0;
  long double margin = 0;
};

struct ScheduleReport {
  bool ok = true;
  int l_max = 0;
  long double min_margin_seq = 0, min_margin_difficult = 0, margin_easy = 0, margin_N = 0, margin_I = 0;
  std::vector<ScheduleViolation> violations;
};

ScheduleReport verify_schedule(const ScheduleConstants& k, int l_max, const LogDeficitFn& sched = {});

//! Everything the scheme needs, selected and certified in one pass.
struct Setup {
  StairConfig cfg;
  ScheduleConstants sc;
  RSelection rsel;
  T0Selection t0sel;
  ISelection isel;
};

Setup certify_setup(const ProfileConfig& profile, double p, double delta, const CertifyOptions& opt = {});

}  // namespace stairlam

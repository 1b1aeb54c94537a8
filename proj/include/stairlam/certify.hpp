#pragma once
// Certified selection of r, I0, T0, I1, I, T0' and the set envelopes, by interval
// subdivision of the closed parameter box with outward rounding.

#include <string>
#include <vector>

#include "stairlam/interval.hpp"
#include "stairlam/staircase.hpp"

namespace stairlam {

struct CertifyOptions {
  int horizon = 50;          //!< indices certified beyond the selected constant
  int max_index = 20000;     //!< search limit for I0
  long box_budget = 200000;  //!< sub-boxes per index
  double r_cap = 1.1;        //!< largest r considered
  int distance_cutoff = 30;  //!< pairwise box distances up to I + cutoff
};

struct BracketMargin {
  int index = 0;
  double lower_slack = 0;  //!< min over boxes of lo(lambda3) - r^{-2}
  double upper_slack = 0;  //!< min over boxes of r^{-(p+2 delta)} - hi(lambda3)
  long boxes = 0;
};

struct RSelection {
  double r = 0;
  int I0 = 0;
  double log_r_L = 0;  //!< g(r) = log_r L(r) at the returned r
  double worst_lower = 0, worst_upper = 0;
  std::vector<BracketMargin> margins;  //!< one per certified index
};

//! Interval enclosure of lambda^3_i over the box a0p in X, a0m in Y.
Interval lambda3_enclosure(const StairConfig& cfg, int i, Interval X, Interval Y);
//! Enclosure of (lambda^1, lambda^3) sharing the same intermediate intervals.
std::pair<Interval, Interval> lambda13_enclosure(const StairConfig& cfg, int i, Interval X, Interval Y);

//! Picks r by bisection and certifies I0. Throws BudgetError.
RSelection select_r_I0(const ProfileConfig& profile, double p, double delta, const CertifyOptions& opt = {});

//! Certifies the bracket for one index with adaptive subdivision; dmax > 0 certifies
//! the interpolated coefficient for deficits in [0, dmax]. Returns false on failure.
bool certify_index(const StairConfig& cfg, int i, double dmax, long budget, BracketMargin& out);

struct T0Selection {
  double T0 = 0;
  int I1 = 0;
  double worst_lower = 0, worst_upper = 0;
};
T0Selection select_T0_I1(const StairConfig& cfg, int I0, const CertifyOptions& opt = {});

struct DistanceCertificate {
  double value = 0;          //!< certified lower bound on the set distance
  double pairwise_min = 0;   //!< over index pairs up to the cutoff
  double tail_v_w1 = 0;      //!< a22 gap bound covering tail pairs
  double tail_v_w2 = 0;      //!< a11 gap bound covering tail pairs
  double v_a22_floor = 0;    //!< lower envelope of a22 over V_I
  int cutoff = 0;
};

struct ISelection {
  int I = 0;
  double T0prime = 0;
  int I_min_power = 0;  //!< smallest I with r^I >= 1/(r^{2 delta} - 1)
  DistanceCertificate distance;
};
ISelection select_I_T0prime(const StairConfig& cfg, double T0, int I1, const CertifyOptions& opt = {});

//! Smallest integer I with r^I >= 1/(r^{2 delta} - 1).
int min_I_power(double r, double delta);

struct Envelope {
  double C = 0;         //!< sup (|X11|^p + |X22|^p) / r^{p l}, slightly inflated
  bool offdiag_ok = true;
};
//! label in {U1, U2, V, W1, W2}; W labels range over t in (T0, 1).
Envelope envelope_check(const StairConfig& cfg, Kind label, int l, double T0);
//! Single constant valid for all five labels and l in [lo, hi].
double envelope_constant(const StairConfig& cfg, double T0, int lo, int hi);

}  // namespace stairlam

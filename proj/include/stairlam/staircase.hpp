#pragma once
// Matrix families, splitting coefficients, interpolation maps and their inversions.

#include <optional>
#include <string>

#include "stairlam/core.hpp"
#include "stairlam/profile.hpp"

namespace stairlam {

struct ParamPoint {
  double a0p = 1.5, a0m = 1.5, b = 0.0;

  bool in_box() const { return a0p > 1 && a0p < 2 && a0m > 1 && a0m < 2 && b > -1 && b < 1; }
  void validate() const;
  bool operator==(const ParamPoint&) const = default;
};

struct StairConfig {
  ProfileConfig profile;
  double r = 1.1;
  double p = 1.2;
  double delta = 0.02;

  //! Checks the ranges the construction relies on: r in (1,2), 1 < p, p + 2 delta < p_crit.
  void validate() const;
  //! The stronger standing assumption delta < (p_crit - p)/10.
  bool standing_assumption() const;
  double c() const;  //!< sqrt(lambda/(r Lambda)), scale of the minus sequence
};

enum class Kind { A, B, C, D, E, W1, W2, V, U1, U2 };
std::string to_string(Kind k);
Kind kind_from_string(const std::string& s);

enum class Sign { Plus, Minus };

//! Interpolation parameter t held through its deficit 1 - t in log form, so that
//! t extremely close to 1 stays representable.
struct Blend {
  long double log_deficit = 0;

  static Blend from_t(double t);
  static Blend from_log_deficit(long double ld) { return Blend{ld}; }
  double deficit() const { return static_cast<double>(std::exp(log_deficit)); }
  double t() const { return -static_cast<double>(std::expm1(log_deficit)); }
};

//! Mixture weight 1 - t/t' for t < t', computed from the deficits.
double corr_split_weight(const Blend& t, const Blend& tp);

double a_seq(const StairConfig& cfg, Sign sign, int k, const ParamPoint& P);
SymMatrix2 family_matrix(const StairConfig& cfg, Kind kind, int i, const ParamPoint& P);

struct Coeffs {
  double l1 = 0, l2 = 0, l3 = 0;
  double sum() const { return l1 + l2 + l3; }
};

Coeffs split_coeffs(const StairConfig& cfg, int i, const ParamPoint& P);
SymMatrix2 interp_map(const StairConfig& cfg, int which, int i, const Blend& t, const ParamPoint& P);
SymMatrix2 interp_map(const StairConfig& cfg, int which, int i, double t, const ParamPoint& P);
Coeffs interp_coeffs(const StairConfig& cfg, int i, const Blend& t, const ParamPoint& P);
Coeffs interp_coeffs(const StairConfig& cfg, int i, double t, const ParamPoint& P);

//! Labeled map: A/B/C/D/E families, W1/W2 interpolation maps (t required), V = A.
SymMatrix2 labeled_matrix(const StairConfig& cfg, Kind kind, int i, const std::optional<Blend>& t,
                          const ParamPoint& P);

//! Recovers P from X for kind A (or V), W1, W2. Throws NotInImageError.
ParamPoint invert_family(const StairConfig& cfg, Kind kind, int i, const std::optional<Blend>& t,
                         const SymMatrix2& X);

double p_critical(double lambda, double Lambda);
//! L(r) from the limit of lambda^3_i as i grows.
double limit_L(double lambda, double Lambda, double r);
//! log_r L(r).
double log_r_L(double lambda, double Lambda, double r);

}  // namespace stairlam

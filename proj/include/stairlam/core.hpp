#pragma once
// Shared value types and error hierarchy.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stairlam {

struct SymMatrix2 {
  double a11 = 0, a12 = 0, a22 = 0;

  SymMatrix2 operator+(const SymMatrix2& o) const { return {a11 + o.a11, a12 + o.a12, a22 + o.a22}; }
  SymMatrix2 operator-(const SymMatrix2& o) const { return {a11 - o.a11, a12 - o.a12, a22 - o.a22}; }
  SymMatrix2 operator*(double s) const { return {a11 * s, a12 * s, a22 * s}; }
  bool operator==(const SymMatrix2&) const = default;

  //! Frobenius norm of the full 2x2 matrix.
  double norm() const { return std::sqrt(a11 * a11 + 2 * a12 * a12 + a22 * a22); }
  double max_abs() const { return std::fmax(std::fabs(a11), std::fmax(std::fabs(a12), std::fabs(a22))); }
  bool finite() const { return std::isfinite(a11) && std::isfinite(a12) && std::isfinite(a22); }
};

inline SymMatrix2 operator*(double s, const SymMatrix2& m) { return m * s; }

inline double max_entry_diff(const SymMatrix2& a, const SymMatrix2& b) { return (a - b).max_abs(); }

//! General 2x2 matrix, row major: {g11, g12, g21, g22}.
using Mat2 = std::array<double, 4>;
using Vec2 = std::array<double, 2>;

inline Mat2 to_mat(const SymMatrix2& s) { return {s.a11, s.a12, s.a12, s.a22}; }

// Errors. The CLI maps these onto exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct NotInImageError : Error {
  using Error::Error;
};
struct InvalidSplitError : Error {
  using Error::Error;
};
struct BudgetError : Error {
  using Error::Error;
};
struct ScheduleError : Error {
  using Error::Error;
};
struct DiagnosticFailure : Error {
  using Error::Error;
};
struct InfeasibleError : Error {
  using Error::Error;
};
struct CapError : Error {
  using Error::Error;
};
struct InternalError : Error {
  using Error::Error;
};
struct InputError : Error {
  using Error::Error;
};

}  // namespace stairlam

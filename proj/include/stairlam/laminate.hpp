#pragma once
// Laminates of finite order: atoms, weights and the splitting certificate that
// produced them from a Dirac mass.

#include <optional>
#include <string>
#include <vector>

#include "stairlam/staircase.hpp"

namespace stairlam {

struct AtomTag {
  Kind kind = Kind::A;
  int index = 0;
  std::optional<long double> log_deficit;  //!< interpolation parameter, when the kind has one

  bool operator==(const AtomTag&) const = default;
};

struct Atom {
  double weight = 1;
  SymMatrix2 X;
  AtomTag tag;
};

struct SplitStep {
  int atom = 0;
  SymMatrix2 B1, B2;
  double s = 0;
  double fraction = 1;
  AtomTag tag1, tag2;
};

struct Laminate {
  Atom root;  //!< the Dirac mass the certificate starts from
  std::vector<Atom> atoms;
  std::vector<SplitStep> certificate;

  static Laminate dirac(const SymMatrix2& X, const AtomTag& tag = {});
  double total_weight() const;
  //! Index of the atom within the merge threshold of X, or -1.
  int find(const SymMatrix2& X) const;
};

constexpr double kMergeTol = 1e-9;

//! Merge test scaled by the magnitude of the entries.
bool coincide(const SymMatrix2& a, const SymMatrix2& b);

SymMatrix2 barycenter(const Laminate& nu);
Laminate elementary_split(const Laminate& nu, const SplitStep& step);
//! Rank-one test and barycenter test of a step against the atom it splits. Throws InvalidSplitError.
void check_split(const SymMatrix2& atom, const SplitStep& step);

Laminate build_mu_i(const StairConfig& cfg, int i, const ParamPoint& P);
Laminate build_mu_interp(const StairConfig& cfg, int i, int j, const Blend& t, const ParamPoint& P);
Laminate build_corr(const StairConfig& cfg, int which, int i, int j, const Blend& t, const Blend& tp,
                    const ParamPoint& P);

struct ValidationReport {
  bool ok = true;
  std::string stage;  //!< simplex | rank | barycenter | reproduction
  std::string message;
};

ValidationReport validate(const Laminate& nu);

//! Eigen-decomposition of a symmetric rank-one matrix M = kappa n n^T.
struct RankOne {
  double kappa = 0;
  Vec2 n{1, 0};
  double second = 0;  //!< magnitude of the other eigenvalue
};
RankOne rank_one_decompose(const SymMatrix2& M);

}  // namespace stairlam

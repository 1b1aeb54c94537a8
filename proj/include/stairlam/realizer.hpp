#pragma once
// Piecewise-affine realization of laminates on convex polygons: each splitting is
// realized by a sawtooth in the rank-one direction, cut off to the affine boundary
// datum by a clamped distance function.

#include <optional>
#include <string>
#include <vector>

#include "stairlam/laminate.hpp"
#include "stairlam/scheme.hpp"

namespace stairlam {

using Polygon = std::vector<Vec2>;  // counterclockwise, convex

double polygon_area(const Polygon& P);
double polygon_diameter(const Polygon& P);
//! Keeps the part with a.x <= b.
Polygon clip(const Polygon& P, const Vec2& a, double b);
Polygon unit_square();

struct AffineCell {
  Polygon poly;
  Mat2 G{};
  Vec2 c{};
  int atom = -1;  //!< atom index of the laminate being realized; -1 in transition layers
  std::optional<AtomTag> label;

  Vec2 eval(const Vec2& x) const { return {G[0] * x[0] + G[1] * x[1] + c[0], G[2] * x[0] + G[3] * x[1] + c[1]}; }
};

struct PAMap {
  Polygon domain;
  std::vector<AffineCell> cells;
  Mat2 G0{};
  Vec2 c0{};
};

struct OscParams {
  double theta = 1.0 / 8;      //!< period as a fraction of the cell extent along the lamination normal
  double eta = 0.05;           //!< transition-layer area budget
  double sup_step = 1e300;     //!< sup-deviation budget of one lamination
  int max_periods = 1 << 14;   //!< beyond this the budget is declared infeasible
  double min_area = 1e-9;      //!< cells below this area are not split further
  double layer_cap = 1e6;      //!< cells whose cutoff layer would be steeper than this are not split
};

//! Slope of the boundary cutoff that simple_lamination would use on this cell.
double cutoff_slope(const Polygon& poly, const Vec2& n, double s, double eta, double theta);

//! Cells with atom 0 carry B1, atom 1 carries B2, -1 the boundary layer.
std::vector<AffineCell> simple_lamination(const AffineCell& cell, const SymMatrix2& A, const SymMatrix2& B1,
                                          const SymMatrix2& B2, double s, const OscParams& osc);

struct RealizeReport {
  std::vector<double> fractions;  //!< per final atom, area with gradient within grad_tol
  std::vector<double> weights;
  double max_fraction_error = 0;
  double sup_deviation = 0;
  double layer_fraction = 0;
  double antisym_fraction = 0;
  double unrealized_fraction = 0;
};

//! Realizes nu on a single cell whose affine map has gradient nu.root.
PAMap realize_laminate(const AffineCell& cell, const Laminate& nu, double grad_tol, double eta, double sup_budget,
                       RealizeReport* report = nullptr, const OscParams& base = {});

struct MapChecks {
  double tiling_error = 0;      //!< |sum of cell areas - domain area| / domain area
  double continuity_error = 0;  //!< max trace mismatch at cell vertices
  double boundary_error = 0;    //!< max deviation from the boundary datum on sampled boundary points
  double sup_deviation = 0;     //!< max |u - (G0 x + c0)| over vertices
  double antisym_fraction = 0;
  double mean_diameter = 0;
};

MapChecks check_map(const PAMap& map, int boundary_samples = 1000);

struct HistogramEntry {
  Kind kind = Kind::V;
  int index = 0;
  double area_fraction = 0;
  double sim_mass = 0;
};

struct SchemeRealization {
  PAMap map;
  std::vector<HistogramEntry> histogram;
  double max_histogram_error = 0;
  double unclassified_fraction = 0;
  std::vector<double> mean_diameter;  //!< per depth
};

SchemeRealization realize_scheme(const Scheme& s, const ParamPoint& P0, int depth, const OscParams& osc = {},
                                 size_t cell_cap = 1000000);

}  // namespace stairlam

#pragma once

// Connected sums of rotationally symmetric pieces: flattening near a point,
// the conformal change to a half cylinder, gluing along S^3 x [0, l], slice
// selection, transplanted test functions and the resulting functional gap.

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "conformal4/discretization.hpp"
#include "conformal4/yamabe.hpp"

namespace conformal4 {

// Quintic smoothstep: 0 on (-inf, 1/2], 1 on [1, inf), C^2 in between.
struct CutoffProfile {
  template <class T>
  static T value(const T& t) {
    const double tv = value_of(t);
    if (tv <= 0.5) return T(0.0);
    if (tv >= 1.0) return T(1.0);
    const T y = 2.0 * t - 1.0;
    return y * y * y * (10.0 + y * (-15.0 + 6.0 * y));
  }
  static double derivative(double t);
  static double second_derivative(double t);
};

// Geodesic polar profile dr^2 + B(r)^2 g_{S^3} around a point, r in (0, r_max).
struct RadialProfile {
  std::string name;
  std::function<Jet4(const Jet4&)> b;
  double r_max = 0.0;  // B vanishes there (antipodal pole); infinite for flat space
};

RadialProfile round_s4_profile(double radius = 1.0);
RadialProfile flat_profile();

struct FlattenResult {
  RadialProfile original;
  RadialProfile flattened;  // B'^2 = r^2 + xi(r / delta) (B^2 - r^2)
  double delta = 0.0;
  // sup over r <= delta of |g' - g|_g, i.e. |B'^2 - B^2| / B^2.
  double defect = 0.0;
  // sup of the largest |eigenvalue| of the curvature operator of g' on r <= delta.
  double curvature_sup = 0.0;
  double fitted_c = 0.0;  // defect / delta^2
};

// Throws PreconditionError unless 0 < delta < r_max / 2.
FlattenResult flatten_near_point(const RadialProfile& profile, double delta);

// The flattened piece multiplied by exp(-(1 - xi(2r / delta)) log r^2) and
// written in t = -log r: A(t)^2 dt^2 + B(t)^2 g_{S^3}. The factor is 1 for
// r >= delta / 2 and r^{-2} for r <= delta / 4, where A = B = 1 exactly.
struct CylinderProfile {
  FlattenResult flat;
  WarpFunction warp;
  double t_pole = 0.0;      // -log r_max
  double t_junction = 0.0;  // log(4 / delta), start of the exact cylinder
};

CylinderProfile cylinder_rescale(const FlattenResult& flat);

// M_l in one coordinate tau: piece 1 on [t_pole1, t_junction1], the neck
// S^3 x [0, l] after it, then piece 2 traversed backwards.
struct GluedManifold {
  CylinderProfile piece1, piece2;
  double l = 0.0;
  Interval range;
  double neck_start = 0.0, neck_end = 0.0;
  WarpFunction warp;
  // max |A| and |B| mismatch between the piece formula and the neck at each junction
  double junction_jump = 0.0;
};

// Throws PreconditionError for l <= 0 or a piece without a pole.
GluedManifold glue(const CylinderProfile& piece1, const CylinderProfile& piece2, double l);

// A piece with its half cylinder continued to tau = end.
WarpFunction piece_with_end(const CylinderProfile& piece);

// Finite-volume line on M_l with step close to h. The cell count is chosen so
// that the grid is mirror symmetric whenever the two pieces coincide.
std::unique_ptr<WarpedLine> glued_line(const GluedManifold& m, double h, SigmaMode mode = SigmaMode::Full);

// Volume by composite Gauss-Legendre in tau over [lo, hi].
double warped_volume(const WarpFunction& warp, Interval range, double panel = 0.05);

struct SliceResult {
  std::size_t node = 0;
  double t = 0.0;
  double energy = 0.0;       // 2 pi^2 (u'^2 + u^2) at the slice
  double mean_energy = 0.0;  // mean of the same quantity over the neck nodes
  bool bound_holds = false;  // energy <= mean_energy
};

// Slice energies 2 pi^2 (du^2 + u^2) at the given samples; picks the global
// minimum (first one on ties).
SliceResult best_slice(const std::vector<double>& t, const std::vector<double>& u, const std::vector<double>& du);
// Neck nodes of a glued line, with central differences for u'.
SliceResult best_slice(const GluedManifold& m, const WarpedLine& line, const Field& u);

struct PieceFunction {
  std::unique_ptr<WarpedLine> line;
  Field values;
};

struct TransplantResult {
  PieceFunction piece1, piece2;
  double energy = 0.0;  // sum over both pieces of int sigma U^2 + 6 |grad U|^2
  double norm_s = 0.0;  // sum over both pieces of int |U|^s
  double quotient = 0.0;
  double s = 4.0;
  // Union minus M_l for energy and s-norm. Everything away from the cut is
  // shared and cancels; what remains is the doubled slice cell and the ramps.
  double energy_increment = 0.0;
  double norm_increment = 0.0;
};

// U_l: u_l up to the slice on each side, (1 - tau) u_l(t_l) over one unit of
// cylinder beyond it, zero further out.
TransplantResult transplant(const GluedManifold& m, const WarpedLine& line, const Field& u, const SliceResult& slice,
                            double s);

// Uniform: u = 1, mirror symmetric when the pieces coincide. Piece: mass in
// piece 1 decaying like e^{-t} along the neck.
enum class GlueInit { Uniform, Piece };

struct GlueRecipe {
  RadialProfile piece1 = round_s4_profile();
  RadialProfile piece2 = round_s4_profile();
  double delta1 = 0.2, delta2 = 0.2;
  std::vector<double> lengths{5.0, 10.0, 20.0, 40.0};
  double epsilon = 1e-6;
  double s = 3.9;
  double h = 0.02;
  GlueInit init = GlueInit::Uniform;
  SolverOptions solver;
  std::vector<double> flatten_deltas{0.2, 0.1, 0.05};
};

GlueRecipe parse_glue_recipe(const std::string& json_text);

struct GlueRow {
  double l = 0.0;
  double mu = 0.0;
  double residual = 0.0;
  bool converged = false;
  double slice_t = 0.0;  // measured from the start of the neck
  double slice_energy = 0.0;
  bool slice_bound_holds = false;
  double union_norm = 0.0;
  double union_quotient = 0.0;
  double gap = 0.0;
  double gap_relaxed = 0.0;  // same pipeline with the solver tolerance doubled
  double volume = 0.0;
  double volume_pieces = 0.0;  // vol(piece 1) + vol(piece 2) + 2 pi^2 l
  double junction_jump = 0.0;
  double neck_sigma_error = 0.0;  // max |sigma - 6| over neck nodes
  // max |u(tau) - u(mirror tau)| / max u; meaningful for identical pieces.
  double mirror_defect = 0.0;
};

struct ConnectedSumReport {
  std::vector<GlueRow> rows;
  std::vector<double> flatten_deltas, flatten_defects, flatten_curvature;
  double flatten_exponent = 0.0;
  double flatten_c = 0.0;
  bool gap_decreasing = false;
  double gap_c = 0.0;              // max over l of l * gap
  double slice_c = 0.0;            // max over l of l * slice energy
  bool slice_bounded = false;
  bool epsilon_stable = false;
  std::string cylinder_reading;
};

ConnectedSumReport verify_connected_sum(const GlueRecipe& recipe);

// Columns: l,mu,residual,slice_t,slice_energy,union_norm,gap.
std::string glue_csv(const ConnectedSumReport& report);

}  // namespace conformal4

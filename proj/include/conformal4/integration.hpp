#pragma once

// Tensor-product quadrature over catalog charts and the curvature integrals
// built on it (volume, Yamabe quotients, Gauss-Bonnet-Chern pieces).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conformal4/decomposition.hpp"
#include "conformal4/manifold.hpp"

namespace conformal4 {

// Gauss-Legendre nodes and weights on [lo, hi].
void gauss_legendre(int m, double lo, double hi, std::vector<double>& nodes, std::vector<double>& weights);

struct AxisRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

struct ChartRule {
  int chart = 0;
  std::array<AxisRule, 4> axes;
  std::size_t size() const;
};

struct QuadratureNode {
  int chart = 0;
  Vec4 x{};
  double weight = 0.0;  // includes sqrt(det g) and the partition factor
};

struct QuadratureOptions {
  // Closed-box margin kept away from non-periodic chart boundaries.
  double boundary_shrink = 1e-6;
  // Collapse declared cyclic axes to one node carrying the full axis length.
  bool exploit_cyclic = true;
};

struct QuadratureRule {
  int m = 0;
  QuadratureOptions options;
  std::vector<ChartRule> charts;

  std::size_t node_count() const;
  // Materialized nodes with metric-weighted weights. Sweeps inside
  // functional_report compute the same weights lazily from the jets.
  std::vector<QuadratureNode> nodes(const ManifoldSpec& spec) const;
};

// Throws PreconditionError for m < 4, for an integration chart with an
// unbounded non-periodic axis, or when a declared cyclic axis is not one.
QuadratureRule build_quadrature(const ManifoldSpec& spec, int m, const QuadratureOptions& options = {});

double integrate_volume(const ManifoldSpec& spec, const QuadratureRule& rule);

enum class SigmaMode { Full, Plus };
const char* to_string(SigmaMode mode);
SigmaMode parse_sigma_mode(const std::string& text);

// f(W) = 6 max(lambda_max(W+), lambda_max(W-)) or 6 lambda_max(W+).
double modified_f(const CurvatureBlocks& b, SigmaMode mode);

struct GaussBonnetPieces {
  double wplus = 0.0;      // integral of |W+|^2
  double wminus = 0.0;     // integral of |W-|^2
  double scalar_sq = 0.0;  // integral of R^2 / 24
  double ric0_half = 0.0;  // integral of |Ric0|^2 / 2
};

struct FunctionalReport {
  std::string manifold;
  SigmaMode mode = SigmaMode::Full;
  int m = 0;
  std::size_t node_count = 0;

  double volume = 0.0;
  double total_scalar = 0.0;
  double yamabe_quotient = 0.0;
  double f_total = 0.0;
  double generalized_quotient = 0.0;
  GaussBonnetPieces gb;
  double chi_estimate = 0.0;
  double lambda_sq_integral = 0.0;

  double sigma_min = 0.0, sigma_max = 0.0;
  double sigma_plus_min = 0.0, sigma_plus_max = 0.0;
  double scalar_min = 0.0, scalar_max = 0.0;
  double ric0_max = 0.0;  // max of |Ric0|^2 over nodes
  bool einstein = false;
  // Pointwise statistics above use nodes with cond(g) <= kStatConditionLimit
  // (all nodes when none qualifies); integrals use every node.
  std::size_t stat_nodes = 0;

  // Differences against the same sweep at resolution m/2, when requested.
  std::optional<double> chi_convergence;
  std::optional<double> volume_convergence;
};

inline constexpr double kStatConditionLimit = 1e4;

FunctionalReport functional_report(const ManifoldSpec& spec, const QuadratureRule& rule,
                                   SigmaMode mode = SigmaMode::Full);

// Points distributed by the Riemannian volume of the integration charts
// (rejection sampling against sqrt(det g)), reproducible for a given seed.
std::vector<QuadratureNode> sample_points(const ManifoldSpec& spec, std::size_t count, std::uint64_t seed);

// Runs functional_report at m and at m/2 and records the differences.
FunctionalReport functional_report_checked(const ManifoldSpec& spec, int m, SigmaMode mode = SigmaMode::Full,
                                           const QuadratureOptions& options = {});

enum class PinchingVerdict { Strict, Equality, Violated };
const char* to_string(PinchingVerdict v);

struct PinchingResult {
  double lhs = 0.0;  // integral of max(lambda_max(W+), lambda_max(W-))^2
  double rhs = 0.0;  // Y^2 / 36
  double y_value = 0.0;
  std::string y_source;  // "einstein-quotient" or "supplied"
  PinchingVerdict verdict = PinchingVerdict::Violated;
  double relative_gap = 0.0;
  bool y_positive = false;
};

// With no supplied estimate the Einstein quotient is used, which requires the
// report to have detected an Einstein metric; otherwise PreconditionError.
PinchingResult pinching_condition(const FunctionalReport& report, std::optional<double> y_estimate = {});

}  // namespace conformal4

#pragma once

// Chart-level description of the catalog 4-manifolds and of custom metrics.

#include <array>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "conformal4/jet.hpp"

namespace conformal4 {

using Vec4 = std::array<double, 4>;
using Point4J = std::array<Jet4, 4>;
using MetricMatrixJ = std::array<std::array<Jet4, 4>, 4>;
using MetricEvaluator = std::function<MetricMatrixJ(const Point4J&)>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
};

struct ChartDomain {
  std::string name;
  std::array<Interval, 4> box{};
  // Periodic axes get trapezoid nodes and accept any coordinate value.
  std::array<bool, 4> periodic{};
  // Axes along which the coefficients are constant (Killing coordinates).
  std::array<bool, 4> cyclic{};
  MetricEvaluator metric;
  // Partition-of-unity factor; an empty function means identically 1.
  std::function<double(const Vec4&)> weight;
  // Evaluation-only charts are skipped by quadrature.
  bool integrate = true;
  Vec4 reference_point{};

  bool contains(const Vec4& x) const;
  double partition_weight(const Vec4& x) const { return weight ? weight(x) : 1.0; }
};

enum class ManifoldKind { RoundSphere4, FlatTorus4, ProductS3xS1, FubiniStudyCP2, ProductS2xS2, CustomChart };

const char* to_string(ManifoldKind kind);

struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::CustomChart;
  std::string name;
  std::map<std::string, double> params;
  // Sign of the chosen orientation relative to the chart coordinate order.
  int orientation = 1;
  std::vector<ChartDomain> charts;

  double param(const std::string& key) const;
};

namespace catalog {

// g = 4 r^2 / (1 + |x|^2)^2 dx^2 on R^4 (evaluation chart 0) and the polar
// chart r^2 (dchi^2 + sin^2 chi g_{S^3}) in (chi, eta, xi1, xi2) (integration chart 1).
ManifoldSpec round_sphere_4(double radius = 1.0);

ManifoldSpec flat_torus_4(const Vec4& periods = {1.0, 1.0, 1.0, 1.0});

// Hopf coordinates (eta, xi1, xi2) on S^3(r) times the circle coordinate t in [0, L).
ManifoldSpec product_s3xs1(double radius = 1.0, double length = 2.0 * 3.14159265358979323846);

// Fubini-Study with sectional curvature in [1, 4] (R = 24) scaled by scale^2,
// in coordinates (rho, theta, phi, psi); orientation is the complex one.
ManifoldSpec fubini_study_cp2(double scale = 1.0);

ManifoldSpec product_s2xs2(double r1 = 1.0, double r2 = 1.0);

// Resolves catalog names ("s4", "t4", "s3xs1", "cp2-fs", "cp2-bar", "s2xs2" and
// the long kind tags). Unknown names throw ParseError.
ManifoldSpec by_name(const std::string& name, const std::map<std::string, double>& params = {});

std::vector<std::string> names();

}  // namespace catalog

ManifoldSpec reversed(ManifoldSpec spec);

// Metric A(t)^2 dt^2 + B(t)^2 g_{S^3} in coordinates (t, eta, xi1, xi2), the
// S^3 factor written in Hopf coordinates.
using WarpFunction = std::function<std::pair<Jet4, Jet4>(const Jet4& t)>;
ChartDomain make_warped_chart(std::string name, WarpFunction warp, Interval t_range);

}  // namespace conformal4

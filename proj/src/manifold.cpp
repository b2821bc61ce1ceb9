#include "conformal4/manifold.hpp"

#include <cmath>
#include <numbers>

#include "conformal4/errors.hpp"

namespace conformal4 {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

MetricMatrixJ diagonal(const Jet4& a, const Jet4& b, const Jet4& c, const Jet4& d) {
  MetricMatrixJ g;
  for (auto& row : g) row.fill(Jet4(0.0));
  g[0][0] = a;
  g[1][1] = b;
  g[2][2] = c;
  g[3][3] = d;
  return g;
}

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw PreconditionError(std::string(what) + " must be positive and finite");
}

}  // namespace

bool ChartDomain::contains(const Vec4& x) const {
  for (int a = 0; a < 4; ++a) {
    if (!std::isfinite(x[a])) return false;
    if (periodic[a]) continue;
    if (!(x[a] > box[a].lo && x[a] < box[a].hi)) return false;
  }
  return true;
}

const char* to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::RoundSphere4: return "round-sphere-4";
    case ManifoldKind::FlatTorus4: return "flat-torus-4";
    case ManifoldKind::ProductS3xS1: return "product-S3xS1";
    case ManifoldKind::FubiniStudyCP2: return "fubini-study-CP2";
    case ManifoldKind::ProductS2xS2: return "product-S2xS2";
    case ManifoldKind::CustomChart: return "custom-chart";
  }
  return "unknown";
}

double ManifoldSpec::param(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) throw PreconditionError("manifold '" + name + "' has no parameter '" + key + "'");
  return it->second;
}

ManifoldSpec reversed(ManifoldSpec spec) {
  spec.orientation = -spec.orientation;
  spec.name += " (reversed)";
  return spec;
}

ChartDomain make_warped_chart(std::string name, WarpFunction warp, Interval t_range) {
  ChartDomain c;
  c.name = std::move(name);
  c.box = {t_range, Interval{0.0, kPi / 2}, Interval{0.0, 2 * kPi}, Interval{0.0, 2 * kPi}};
  c.periodic = {false, false, true, true};
  c.cyclic = {false, false, true, true};
  c.metric = [warp = std::move(warp)](const Point4J& x) {
    auto [a, b] = warp(x[0]);
    const Jet4 b2 = b * b;
    const Jet4 s = sin(x[1]), co = cos(x[1]);
    return diagonal(a * a, b2, b2 * s * s, b2 * co * co);
  };
  c.reference_point = {t_range.mid(), kPi / 4, kPi, kPi};
  return c;
}

namespace catalog {

ManifoldSpec round_sphere_4(double radius) {
  require_positive(radius, "sphere radius");
  ManifoldSpec m;
  m.kind = ManifoldKind::RoundSphere4;
  m.name = "round-sphere-4";
  m.params = {{"r", radius}};

  ChartDomain stereo;
  stereo.name = "stereographic";
  stereo.box.fill(Interval{-kInf, kInf});
  stereo.integrate = false;
  stereo.metric = [radius](const Point4J& x) {
    Jet4 rho2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
    Jet4 q = 1.0 + rho2;
    Jet4 f = (4.0 * radius * radius) / (q * q);
    return diagonal(f, f, f, f);
  };
  stereo.reference_point = {0.31, -0.47, 0.23, 0.59};

  // r^2 (dchi^2 + sin^2 chi g_{S^3}) with the S^3 factor in Hopf coordinates.
  ChartDomain polar = make_warped_chart(
      "polar-hopf", [radius](const Jet4& chi) { return std::pair<Jet4, Jet4>(Jet4(radius), radius * sin(chi)); },
      Interval{0.0, kPi});
  polar.reference_point = {1.1, 0.7, 2.3, 4.4};

  m.charts = {stereo, polar};
  return m;
}

ManifoldSpec flat_torus_4(const Vec4& periods) {
  for (double p : periods) require_positive(p, "torus period");
  ManifoldSpec m;
  m.kind = ManifoldKind::FlatTorus4;
  m.name = "flat-torus-4";
  m.params = {{"L0", periods[0]}, {"L1", periods[1]}, {"L2", periods[2]}, {"L3", periods[3]}};
  ChartDomain c;
  c.name = "fundamental-box";
  for (int a = 0; a < 4; ++a) c.box[a] = Interval{0.0, periods[a]};
  c.periodic = {true, true, true, true};
  c.cyclic = {true, true, true, true};
  c.metric = [](const Point4J&) { return diagonal(1.0, 1.0, 1.0, 1.0); };
  c.reference_point = {0.1 * periods[0], 0.2 * periods[1], 0.3 * periods[2], 0.4 * periods[3]};
  m.charts = {c};
  return m;
}

ManifoldSpec product_s3xs1(double radius, double length) {
  require_positive(radius, "S^3 radius");
  require_positive(length, "circle length");
  ManifoldSpec m;
  m.kind = ManifoldKind::ProductS3xS1;
  m.name = "product-S3xS1";
  m.params = {{"r", radius}, {"L", length}};
  ChartDomain c;
  c.name = "hopf-times-circle";
  c.box = {Interval{0, kPi / 2}, Interval{0, 2 * kPi}, Interval{0, 2 * kPi}, Interval{0, length}};
  c.periodic = {false, true, true, true};
  c.cyclic = {false, true, true, true};
  c.metric = [radius](const Point4J& x) {
    const double r2 = radius * radius;
    Jet4 s = sin(x[0]), co = cos(x[0]);
    return diagonal(Jet4(r2), r2 * s * s, r2 * co * co, Jet4(1.0));
  };
  c.reference_point = {0.61, 1.3, 4.1, 0.37 * length};
  m.charts = {c};
  return m;
}

ManifoldSpec fubini_study_cp2(double scale) {
  require_positive(scale, "Fubini-Study scale");
  ManifoldSpec m;
  m.kind = ManifoldKind::FubiniStudyCP2;
  m.name = "fubini-study-CP2";
  m.params = {{"scale", scale}};
  // In the coordinate order (rho, theta, phi, psi) the Kahler form is
  // anti-self-dual, so the complex orientation is the reversed one.
  m.orientation = -1;
  ChartDomain c;
  c.name = "cohomogeneity-one";
  c.box = {Interval{0, kPi / 2}, Interval{0, kPi}, Interval{0, 2 * kPi}, Interval{0, 4 * kPi}};
  c.periodic = {false, false, true, true};
  c.cyclic = {false, false, true, true};
  c.metric = [scale](const Point4J& x) {
    // d rho^2 + sin^2 rho (s1^2 + s2^2) + sin^2 rho cos^2 rho s3^2 with
    // s1^2 + s2^2 = (dtheta^2 + sin^2 theta dphi^2) / 4, s3 = (dpsi + cos theta dphi) / 2.
    const double c2 = scale * scale;
    Jet4 sr = sin(x[0]), cr = cos(x[0]);
    Jet4 st = sin(x[1]), ct = cos(x[1]);
    Jet4 a = 0.25 * sr * sr;
    Jet4 b = a * cr * cr;
    MetricMatrixJ g = diagonal(Jet4(c2), c2 * a, c2 * (a * st * st + b * ct * ct), c2 * b);
    g[2][3] = c2 * b * ct;
    g[3][2] = g[2][3];
    return g;
  };
  c.reference_point = {0.53, 1.21, 2.9, 7.1};
  m.charts = {c};
  return m;
}

ManifoldSpec product_s2xs2(double r1, double r2) {
  require_positive(r1, "first S^2 radius");
  require_positive(r2, "second S^2 radius");
  ManifoldSpec m;
  m.kind = ManifoldKind::ProductS2xS2;
  m.name = "product-S2xS2";
  m.params = {{"r1", r1}, {"r2", r2}};
  ChartDomain c;
  c.name = "spherical-angles";
  c.box = {Interval{0, kPi}, Interval{0, 2 * kPi}, Interval{0, kPi}, Interval{0, 2 * kPi}};
  c.periodic = {false, true, false, true};
  c.cyclic = {false, true, false, true};
  c.metric = [r1, r2](const Point4J& x) {
    Jet4 s1 = sin(x[0]), s2 = sin(x[2]);
    return diagonal(Jet4(r1 * r1), r1 * r1 * s1 * s1, Jet4(r2 * r2), r2 * r2 * s2 * s2);
  };
  c.reference_point = {1.05, 0.8, 2.2, 3.7};
  m.charts = {c};
  return m;
}

namespace {

double lookup(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

}  // namespace

ManifoldSpec by_name(const std::string& name, const std::map<std::string, double>& p) {
  if (name == "s4" || name == "round-sphere-4") return round_sphere_4(lookup(p, "r", 1.0));
  if (name == "t4" || name == "flat-torus-4")
    return flat_torus_4({lookup(p, "L0", 1.0), lookup(p, "L1", 1.0), lookup(p, "L2", 1.0),
                         lookup(p, "L3", 1.0)});
  if (name == "s3xs1" || name == "product-S3xS1")
    return product_s3xs1(lookup(p, "r", 1.0), lookup(p, "L", 2 * kPi));
  if (name == "cp2-fs" || name == "cp2" || name == "fubini-study-CP2")
    return fubini_study_cp2(lookup(p, "scale", 1.0));
  if (name == "cp2-bar") return reversed(fubini_study_cp2(lookup(p, "scale", 1.0)));
  if (name == "s2xs2" || name == "product-S2xS2")
    return product_s2xs2(lookup(p, "r1", 1.0), lookup(p, "r2", 1.0));
  throw ParseError("unknown catalog manifold '" + name + "'");
}

std::vector<std::string> names() { return {"s4", "t4", "s3xs1", "cp2-fs", "cp2-bar", "s2xs2"}; }

}  // namespace catalog

}  // namespace conformal4

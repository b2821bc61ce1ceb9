#include <cmath>
#include <random>

#include <doctest.h>

#include "conformal4/errors.hpp"
#include "conformal4/geometry.hpp"
#include "conformal4/manifold_io.hpp"

using namespace conformal4;

namespace {

const char* kBumpy = R"json({
  "name": "bumpy",
  "charts": [{
    "bounds": [[-1, 1], [-1, 1], [-1, 1], [-1, 1]],
    "metric": [
      ["1 + 0.3 * sin(x1) * x2", "0.1 * x0 * x3", "0", "0.05 * cos(x2)"],
      ["0.1 * x0 * x3", "exp(0.2 * x0)", "0.07 * x1", "0"],
      ["0", "0.07 * x1", "2 + x3 * x3", "0.1 * sin(x0 + x1)"],
      ["0.05 * cos(x2)", "0", "0.1 * sin(x0 + x1)", "1.5 + 0.2 * x0 * x1"]],
    "reference_point": [0.2, -0.3, 0.4, 0.1]
  }]
})json";

Mat4 metric_at(const ChartDomain& chart, Vec4 x) { return evaluate_jet(chart, x).g; }

// Fourth-order central difference of the metric along axis k.
Mat4 fd_dg(const ChartDomain& chart, const Vec4& x, int k, double h) {
  auto at = [&](double s) {
    Vec4 y = x;
    y[k] += s;
    return metric_at(chart, y);
  };
  return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
}

struct Sample {
  ManifoldSpec spec;
  int chart;
};

std::vector<Sample> catalog_samples() {
  std::vector<Sample> out;
  for (const auto& name : catalog::names()) {
    ManifoldSpec spec = catalog::by_name(name);
    for (std::size_t c = 0; c < spec.charts.size(); ++c) out.push_back({spec, static_cast<int>(c)});
  }
  return out;
}

double max_abs_diff(const Riemann& a, const Riemann& b) {
  double d = 0.0;
  for (int i = 0; i < 256; ++i) d = std::max(d, std::abs(a.r[i] - b.r[i]));
  return d;
}

}  // namespace

TEST_CASE("flat torus has identity metric and no curvature") {
  const ManifoldSpec t4 = catalog::flat_torus_4();
  const CurvaturePoint c = curvature_at(t4, 0, {0.3, 0.1, 0.7, 0.9});
  CHECK((c.g - Mat4::Identity()).norm() <= 1e-12);
  for (double v : c.riem.r) CHECK(std::abs(v) <= 1e-12);
  CHECK(std::abs(c.scalar) <= 1e-12);
}

TEST_CASE("round sphere at the stereographic origin") {
  const ManifoldSpec s4 = catalog::round_sphere_4();
  const MetricJet j = evaluate_jet(s4, 0, {0, 0, 0, 0});
  CHECK((j.g - 4 * Mat4::Identity()).norm() <= 1e-12);
  const Christoffel gam = christoffel(j);
  for (double v : gam.c) CHECK(std::abs(v) <= 1e-12);
  const CurvaturePoint c = curvature(j);
  CHECK(c.scalar == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(c.riem(0, 1, 0, 1) == doctest::Approx(16.0).epsilon(1e-12));
}

TEST_CASE("jet derivatives agree with fourth-order differences on every catalog chart") {
  const double h = 1e-3;
  for (const Sample& s : catalog_samples()) {
    const ChartDomain& chart = s.spec.charts[s.chart];
    const Vec4 x = chart.reference_point;
    const MetricJet j = evaluate_jet(chart, x);
    for (int k = 0; k < 4; ++k) {
      const Mat4 fd = fd_dg(chart, x, k, h);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) CHECK(j.dg(k, a, b) == doctest::Approx(fd(a, b)).epsilon(1e-6).scale(1.0));
    }
    // second derivatives: difference the jet first derivatives
    for (int l = 0; l < 4; ++l) {
      auto dg_at = [&](double sft, int k, int a, int b) {
        Vec4 y = x;
        y[l] += sft;
        return evaluate_jet(chart, y).dg(k, a, b);
      };
      for (int k = 0; k < 4; ++k)
        for (int a = 0; a < 4; ++a)
          for (int b = a; b < 4; ++b) {
            const double fd = (-dg_at(2 * h, k, a, b) + 8 * dg_at(h, k, a, b) - 8 * dg_at(-h, k, a, b) +
                               dg_at(-2 * h, k, a, b)) /
                              (12 * h);
            CHECK(j.ddg(l, k, a, b) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
          }
    }
  }
}

TEST_CASE("christoffel symbols match a finite-difference oracle") {
  const ManifoldSpec bumpy = parse_manifold_json(kBumpy);
  std::vector<Sample> samples = catalog_samples();
  samples.push_back({bumpy, 0});
  for (const Sample& s : samples) {
    const ChartDomain& chart = s.spec.charts[s.chart];
    const Vec4 x = chart.reference_point;
    const Mat4 g = metric_at(chart, x);
    const Mat4 gi = g.inverse();
    std::array<Mat4, 4> d;
    for (int k = 0; k < 4; ++k) d[k] = fd_dg(chart, x, k, 1e-3);
    const Christoffel gam = christoffel(evaluate_jet(chart, x));
    for (int k = 0; k < 4; ++k)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          double expect = 0.0;
          for (int l = 0; l < 4; ++l) expect += 0.5 * gi(k, l) * (d[i](l, j) + d[j](l, i) - d[l](i, j));
          CHECK(gam(k, i, j) == doctest::Approx(expect).epsilon(1e-8).scale(1.0));
        }
  }
}

TEST_CASE("round sphere scalar curvature at random points") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (double r : {1.0, 2.0, 0.5}) {
    const ManifoldSpec s4 = catalog::round_sphere_4(r);
    for (int i = 0; i < 100; ++i) {
      const Vec4 x{nd(rng), nd(rng), nd(rng), nd(rng)};
      const CurvaturePoint c = curvature_at(s4, 0, x);
      CHECK(c.scalar * r * r == doctest::Approx(12.0).epsilon(1e-10));
      CHECK(c.ric0_norm2() <= 1e-9 / (r * r * r * r));
    }
  }
}

TEST_CASE("product and Kaehler curvature values") {
  SUBCASE("S3 x S1") {
    const ManifoldSpec m = catalog::product_s3xs1(1.0, 5.0);
    const CurvaturePoint c = curvature_at(m, 0, m.charts[0].reference_point);
    CHECK(c.scalar == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(c.ric0_norm2() == doctest::Approx(3.0).epsilon(1e-12));
    Eigen::SelfAdjointEigenSolver<Mat4> es(c.frame_ric);
    const Eigen::Vector4d ev = es.eigenvalues();
    CHECK(std::abs(ev(0)) <= 1e-10);
    for (int i = 1; i < 4; ++i) CHECK(ev(i) == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("Fubini-Study") {
    const ManifoldSpec m = catalog::fubini_study_cp2();
    const CurvaturePoint c = curvature_at(m, 0, m.charts[0].reference_point);
    CHECK(c.scalar == doctest::Approx(24.0).epsilon(1e-10));
    CHECK((c.ric - 6.0 * c.g).norm() <= 1e-10);
  }
  SUBCASE("S2 x S2") {
    const ManifoldSpec m = catalog::product_s2xs2(1.0, 2.0);
    const CurvaturePoint c = curvature_at(m, 0, m.charts[0].reference_point);
    CHECK(c.scalar == doctest::Approx(2.0 + 0.5).epsilon(1e-12));
  }
}

TEST_CASE("riemann symmetries, Bianchi identity and the independent route") {
  const ManifoldSpec bumpy = parse_manifold_json(kBumpy);
  const MetricJet j = evaluate_jet(bumpy, 0, bumpy.charts[0].reference_point);
  const CurvaturePoint c = curvature(j);
  const Riemann& r = c.riem;
  double scale = 0.0;
  for (double v : r.r) scale = std::max(scale, std::abs(v));
  REQUIRE(scale > 1e-3);
  const double tol = 1e-12 * scale;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int cc = 0; cc < 4; ++cc)
        for (int d = 0; d < 4; ++d) {
          CHECK(std::abs(r(a, b, cc, d) + r(b, a, cc, d)) <= tol);
          CHECK(std::abs(r(a, b, cc, d) + r(a, b, d, cc)) <= tol);
          CHECK(std::abs(r(a, b, cc, d) - r(cc, d, a, b)) <= tol);
          CHECK(std::abs(r(a, b, cc, d) + r(b, cc, a, d) + r(cc, a, b, d)) <= tol);
        }
  CHECK(max_abs_diff(r, riemann_from_christoffel(j)) <= 1e-10 * scale);

  double trace = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      CHECK(c.ric(a, b) == doctest::Approx(c.ric(b, a)));
      trace += c.g_inv(a, b) * c.ric(a, b);
    }
  CHECK(trace == doctest::Approx(c.scalar).epsilon(1e-12));
  double t0 = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) t0 += c.g_inv(a, b) * c.ric0(a, b);
  CHECK(std::abs(t0) <= 1e-10 * scale);
}

TEST_CASE("oriented orthonormal frames") {
  const ManifoldSpec bumpy = parse_manifold_json(kBumpy);
  const Mat4 g = metric_at(bumpy.charts[0], bumpy.charts[0].reference_point);
  for (int orientation : {1, -1})
    for (const std::array<int, 4>& order : {std::array<int, 4>{0, 1, 2, 3}, std::array<int, 4>{3, 1, 0, 2}}) {
      const Mat4 f = orthonormal_frame(g, orientation, order);
      CHECK((f * g * f.transpose() - Mat4::Identity()).norm() <= 1e-10);
      CHECK((f.determinant() > 0 ? 1 : -1) == orientation);
    }
}

TEST_CASE("curvature scales inversely with the metric") {
  const Vec4 x{0.2, 0.5, -0.1, 0.3};
  const double r1 = curvature_at(catalog::round_sphere_4(1.0), 0, x).scalar;
  const double r2 = curvature_at(catalog::round_sphere_4(2.0), 0, x).scalar;
  CHECK(r2 == doctest::Approx(r1 / 4).epsilon(1e-12));
}

TEST_CASE("domain and degeneracy errors") {
  const ManifoldSpec t4 = catalog::flat_torus_4();
  const ManifoldSpec s3 = catalog::product_s3xs1();
  CHECK_THROWS_AS(evaluate_jet(s3, 0, {2.0, 1.0, 1.0, 1.0}), DomainError);
  const ManifoldSpec bad = parse_manifold_json(R"json({"name": "bad", "charts": [{
      "bounds": [[-1, 1], [-1, 1], [-1, 1], [-1, 1]],
      "metric": [["x0", "0", "0", "0"], ["0", "1", "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "1"]]}]})json");
  CHECK_THROWS_AS(evaluate_jet(bad, 0, {-0.5, 0, 0, 0}), MetricDegeneracyError);
  CHECK_NOTHROW(evaluate_jet(bad, 0, {0.5, 0, 0, 0}));
  CHECK_NOTHROW(evaluate_jet(t4, 0, {3.5, -2.0, 0.1, 0.2}));
}

#include <cmath>
#include <numbers>

#include <doctest.h>

#include "conformal4/errors.hpp"
#include "conformal4/gluing.hpp"

using namespace conformal4;
using std::numbers::pi;

namespace {

std::pair<double, double> warp_at(const WarpFunction& w, double t) {
  const auto [a, b] = w(Jet4(t));
  return {a.v, b.v};
}

CylinderProfile unit_sphere_piece(double delta = 0.2) {
  return cylinder_rescale(flatten_near_point(round_s4_profile(), delta));
}

double line_energy(const WarpedLine& line, const Field& u) {
  return line.integral(line.sigma().cwiseProduct(u).cwiseProduct(u)) + 6.0 * line.dirichlet_energy(u);
}

}  // namespace

TEST_CASE("cutoff profile") {
  CHECK(CutoffProfile::value(0.3) == 0.0);
  CHECK(CutoffProfile::value(0.5) == 0.0);
  CHECK(CutoffProfile::value(1.0) == 1.0);
  CHECK(CutoffProfile::value(1.7) == 1.0);
  CHECK(CutoffProfile::value(0.75) == doctest::Approx(0.5));
  double max_d = 0.0, max_dd = 0.0, prev = 0.0;
  for (int k = 0; k <= 4000; ++k) {
    const double t = 0.4 + 0.7 * k / 4000.0;
    const double v = CutoffProfile::value(t);
    CHECK(v >= prev);
    prev = v;
    max_d = std::max(max_d, std::abs(CutoffProfile::derivative(t)));
    max_dd = std::max(max_dd, std::abs(CutoffProfile::second_derivative(t)));
    const Jet4 j = CutoffProfile::value(Jet4::variable(t, 0));
    CHECK(j.d[0] == doctest::Approx(CutoffProfile::derivative(t)).epsilon(1e-12).scale(1.0));
    CHECK(j.hess(0, 0) == doctest::Approx(CutoffProfile::second_derivative(t)).epsilon(1e-12).scale(1.0));
  }
  CHECK(max_d <= 8.0);
  CHECK(max_dd <= 64.0);
  for (double t : {0.5, 1.0}) {
    CHECK(CutoffProfile::derivative(t) == 0.0);
    CHECK(CutoffProfile::second_derivative(t) == 0.0);
  }
}

TEST_CASE("flattening near a point") {
  const FlattenResult flat = flatten_near_point(flat_profile(), 0.3);
  CHECK(flat.defect == 0.0);
  // polar coordinates cancel to rounding level near r = 0
  CHECK(flat.curvature_sup <= 1e-6);

  const RadialProfile s4 = round_s4_profile();
  std::vector<double> defects;
  for (double d : {0.2, 0.1, 0.05}) {
    const FlattenResult f = flatten_near_point(s4, d);
    defects.push_back(f.defect);
    // r^2 + xi (B^2 - r^2) is r^2 near 0 and B^2 beyond delta
    const double r_in = 0.4 * d, r_out = 1.2 * d;
    CHECK(f.flattened.b(Jet4(r_in)).v == doctest::Approx(r_in).epsilon(1e-14));
    CHECK(f.flattened.b(Jet4(r_out)).v == doctest::Approx(std::sin(r_out)).epsilon(1e-14));
    CHECK(f.curvature_sup < 5.0);
  }
  for (std::size_t k = 1; k < defects.size(); ++k)
    CHECK(std::log(defects[k - 1] / defects[k]) / std::log(2.0) == doctest::Approx(2.0).epsilon(0.1));
  CHECK_THROWS_AS(flatten_near_point(s4, 2.0), PreconditionError);
  CHECK_THROWS_AS(flatten_near_point(s4, 0.0), PreconditionError);
}

TEST_CASE("conformal change to a half cylinder") {
  const CylinderProfile c = unit_sphere_piece(0.2);
  CHECK(c.t_pole == doctest::Approx(-std::log(pi)));
  CHECK(c.t_junction == doctest::Approx(std::log(20.0)));
  // exact cylinder for r <= delta / 4
  for (double t : {c.t_junction, c.t_junction + 0.5, c.t_junction + 3.0}) {
    const auto [a, b] = warp_at(c.warp, t);
    CHECK(std::abs(a - 1.0) <= 1e-14);
    CHECK(std::abs(b - 1.0) <= 1e-14);
  }
  // untouched metric for r >= delta, in t = -log r: A = r, B = sin r
  for (double r : {0.2, 0.5, 2.0}) {
    const auto [a, b] = warp_at(c.warp, -std::log(r));
    CHECK(a == doctest::Approx(r).epsilon(1e-13));
    CHECK(b == doctest::Approx(std::sin(r)).epsilon(1e-13));
  }
  const ChartDomain chart = make_warped_chart("cylinder", piece_with_end(c), {c.t_pole, c.t_junction + 5});
  const CurvaturePoint cp = curvature(evaluate_jet(chart, {c.t_junction + 1.0, 0.7, 1.0, 2.0}));
  const CurvatureBlocks b = decompose(cp, 1);
  CHECK(cp.scalar == doctest::Approx(6.0).epsilon(1e-8));
  CHECK(b.sigma == doctest::Approx(6.0).epsilon(1e-8));
  CHECK(b.wplus_norm2() + b.wminus_norm2() <= 1e-12);
}

TEST_CASE("glued manifolds") {
  const CylinderProfile c = unit_sphere_piece();
  CHECK_THROWS_AS(glue(c, c, 0.0), PreconditionError);
  CHECK_THROWS_AS(glue(c, c, -1.0), PreconditionError);
  for (double l : {5.0, 10.0, 40.0}) {
    const GluedManifold m = glue(c, c, l);
    CHECK(m.junction_jump <= 1e-12);
    CHECK(m.neck_end - m.neck_start == doctest::Approx(l));
    const double pieces = 2 * warped_volume(c.warp, {c.t_pole, c.t_junction});
    CHECK(warped_volume(m.warp, m.range) == doctest::Approx(pieces + 2 * pi * pi * l).epsilon(1e-8));
    // identical pieces give a mirror-symmetric warp and grid
    for (double d : {0.3, 2.0, 4.0}) {
      const auto [a1, b1] = warp_at(m.warp, m.range.lo + d);
      const auto [a2, b2] = warp_at(m.warp, m.range.hi - d);
      CHECK(a1 == doctest::Approx(a2).epsilon(1e-12));
      CHECK(b1 == doctest::Approx(b2).epsilon(1e-12));
    }
    const auto line = glued_line(m, 0.02);
    const std::size_t n = line->size();
    for (std::size_t i = 0; i < n; i += 37)
      CHECK(line->coordinate(i) + line->coordinate(n - 1 - i) == doctest::Approx(m.range.lo + m.range.hi));
  }
}

TEST_CASE("slice selection") {
  // u = e^{-t} on [0, 10]: the slice energy 4 pi^2 e^{-2t} is smallest at the far end
  std::vector<double> t, u, du;
  for (int k = 0; k <= 100; ++k) {
    t.push_back(0.1 * k);
    u.push_back(std::exp(-t.back()));
    du.push_back(-u.back());
  }
  const SliceResult s = best_slice(t, u, du);
  CHECK(s.t == doctest::Approx(10.0));
  CHECK(s.energy == doctest::Approx(4 * pi * pi * std::exp(-20.0)).epsilon(1e-12));
  CHECK(s.bound_holds);

  const std::vector<double> flat(11, 0.5), zero(11, 0.0);
  const SliceResult c = best_slice(std::vector<double>(t.begin(), t.begin() + 11), flat, zero);
  CHECK(c.node == 0);
  CHECK(c.energy == doctest::Approx(2 * pi * pi * 0.25));
  CHECK(c.energy == doctest::Approx(c.mean_energy));
  CHECK(c.bound_holds);
  CHECK_THROWS_AS(best_slice({}, {}, {}), PreconditionError);
}

TEST_CASE("transplanted test function of a constant") {
  const CylinderProfile p = unit_sphere_piece();
  const GluedManifold m = glue(p, p, 10.0);
  const double h = 0.01;
  const auto line = glued_line(m, h);
  const double c = 0.8, s = 3.5;
  const Field u = Field::Constant(line->size(), c);
  const SliceResult slice = best_slice(m, *line, u);
  const TransplantResult tr = transplant(m, *line, u, slice, s);

  // Per side: 6 * 2 pi^2 c^2 / 3 from the mass and 6 * 2 pi^2 c^2 from the slope of the unit ramp.
  CHECK(tr.energy_increment == doctest::Approx(32 * pi * pi * c * c).epsilon(1e-3));
  CHECK(tr.norm_increment == doctest::Approx(4 * pi * pi * std::pow(c, s) / (s + 1)).epsilon(1e-2));
  CHECK(tr.energy == doctest::Approx(line_energy(*line, u) + tr.energy_increment).epsilon(1e-10));
  CHECK(tr.norm_s == doctest::Approx(line->integral(u.array().pow(s).matrix()) + tr.norm_increment).epsilon(1e-10));
  CHECK(tr.quotient == doctest::Approx(tr.energy / std::pow(tr.norm_s, 2 / s)));
  // the ramp reaches zero one unit beyond the slice
  const Field& v1 = tr.piece1.values;
  CHECK(v1[v1.size() - 1] == 0.0);
  CHECK(v1[static_cast<Eigen::Index>(slice.node)] == c);
}

TEST_CASE("connected-sum verification on two round spheres") {
  const ConnectedSumReport rep = verify_connected_sum(GlueRecipe{});
  REQUIRE(rep.rows.size() == 4);
  CHECK(rep.flatten_exponent == doctest::Approx(2.0).epsilon(0.1));
  CHECK(rep.gap_decreasing);
  CHECK(rep.slice_bounded);
  CHECK(rep.epsilon_stable);
  for (const GlueRow& r : rep.rows) {
    CHECK(r.converged);
    CHECK(r.residual <= 1e-9);
    CHECK(r.gap >= 0.0);
    CHECK(r.union_norm >= 1.0 - 1e-12);
    CHECK(r.volume == doctest::Approx(r.volume_pieces).epsilon(1e-6));
    CHECK(r.junction_jump <= 1e-12);
    CHECK(r.neck_sigma_error <= 1e-10);
    CHECK(r.mirror_defect <= 1e-8);
    CHECK(r.mu <= r.union_quotient * (1 + 1e-12));
  }
  CHECK(rep.rows.back().l * rep.rows.back().gap <= rep.gap_c);
  const std::string csv = glue_csv(rep);
  CHECK(csv.rfind("# conformal4 glue v1\nl,mu,residual,slice_t,slice_energy,union_norm,gap\n", 0) == 0);
}

TEST_CASE("glue recipe parsing") {
  const GlueRecipe r = parse_glue_recipe(
      R"({"pieces": [{"kind": "round-s4", "radius": 2.0, "delta": 0.1}, {"kind": "round-s4"}],
          "lengths": [3, 6], "s": 3.7, "h": 0.05, "init": "piece"})");
  CHECK(r.piece1.r_max == doctest::Approx(2 * pi));
  CHECK(r.delta1 == 0.1);
  CHECK(r.delta2 == 0.2);
  CHECK(r.lengths == std::vector<double>{3, 6});
  CHECK(r.init == GlueInit::Piece);
  CHECK_THROWS_AS(parse_glue_recipe(R"({"pieces": [{"kind": "torus"}, {}]})"), ParseError);
  CHECK_THROWS_AS(parse_glue_recipe(R"({"init": "random"})"), ParseError);
  CHECK_THROWS_AS(parse_glue_recipe(R"({"lengths": []})"), ParseError);
  CHECK_THROWS_AS(parse_glue_recipe("[1, 2"), ParseError);
  GlueRecipe bad;
  bad.lengths = {5, -1};
  CHECK_THROWS_AS(verify_connected_sum(bad), PreconditionError);
}

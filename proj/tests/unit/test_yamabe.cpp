#include <algorithm>
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "conformal4/errors.hpp"
#include "conformal4/manifold_io.hpp"
#include "conformal4/yamabe.hpp"

using namespace conformal4;
using std::numbers::pi;

namespace {

const double kSphereY = 8 * std::sqrt(6.0) * pi;

Field sample(const Discretization& d, const std::function<double(double)>& f) {
  Field out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = f(d.coordinate(i));
  return out;
}

}  // namespace

TEST_CASE("sigma transform homogeneity") {
  const auto line = make_discretization(catalog::round_sphere_4(), 80);
  const Field one = Field::Ones(line->size());
  CHECK((sigma_transform(*line, one) - line->sigma()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((sigma_transform(*line, 2.0 * one) - line->sigma() / 4.0).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(sigma_transform_at(*line, 3.0 * one, 5) == doctest::Approx(12.0 / 9.0));
  Field bad = one;
  bad[7] = 0.0;
  CHECK_THROWS_AS(sigma_transform(*line, bad), DomainError);
}

TEST_CASE("sigma transform agrees with direct curvature of the rescaled torus") {
  const auto grid = make_torus_grid(catalog::flat_torus_4(), {32, 1, 1, 1});
  const Field u = sample(*grid, [](double x) { return 1 + 0.1 * std::cos(2 * pi * x); });
  const Field sig = sigma_transform(*grid, u);
  const std::string c = "pow(1 + 0.1 * cos(2 * pi * x0), 2)";
  const ManifoldSpec rescaled = parse_manifold_json(
      R"json({"name": "rescaled-torus", "charts": [{"bounds": [[0, 1], [0, 1], [0, 1], [0, 1]],
       "periodic": [true, true, true, true], "metric": [[")json" + c + R"json(", "0", "0", "0"], ["0", ")json" + c +
      R"json(", "0", "0"], ["0", "0", ")json" + c + R"json(", "0"], ["0", "0", "0", ")json" + c + R"json("]]}]})json");
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const CurvatureBlocks b = decompose(curvature_at(rescaled, 0, {grid->coordinate(i), 0.3, 0.6, 0.9}));
    CHECK(sig[i] == doctest::Approx(b.sigma).epsilon(1e-6));
  }
}

TEST_CASE("functional values with closed forms") {
  const auto torus = make_torus_grid(catalog::flat_torus_4(), {16, 1, 1, 1});
  for (double s : {2.5, 3.0, 4.0}) CHECK(std::abs(functional_Fs(*torus, Field::Ones(torus->size()), s)) <= 1e-12);

  // int |grad u|^2 = pi^2 / 2 and int u^3 = 11 / 8 for u = 1 + cos(2 pi x) / 2
  const Field u = sample(*torus, [](double x) { return 1 + 0.5 * std::cos(2 * pi * x); });
  CHECK(functional_Fs(*torus, u, 3.0) == doctest::Approx(6 * (pi * pi / 2) / std::pow(11.0 / 8.0, 2.0 / 3.0)).epsilon(1e-12));

  const auto sphere = make_discretization(catalog::round_sphere_4(), 200);
  const Field c = Field::Constant(sphere->size(), 0.7);
  CHECK(functional_Fs(*sphere, c, 4.0) == doctest::Approx(kSphereY).epsilon(1e-10));
  const double vol = 8 * pi * pi / 3;
  CHECK(functional_Fs(*sphere, c, 3.0) == doctest::Approx(12 * std::pow(vol, 1.0 / 3.0)).epsilon(1e-10));

  CHECK_THROWS_AS(functional_Fs(*sphere, Field::Zero(sphere->size()), 3.0), DomainError);
  CHECK_THROWS_AS(functional_Fs(*sphere, c, 2.0), PreconditionError);
  CHECK_THROWS_AS(functional_Fs(*sphere, c, 4.5), PreconditionError);
}

TEST_CASE("flat torus minimizer is constant") {
  const auto grid = make_torus_grid(catalog::flat_torus_4(), {8, 8, 8, 8});
  const SubcriticalSolve r = minimize_subcritical(*grid, 3.0, default_initial_factor(*grid));
  CHECK(r.converged);
  CHECK(std::abs(r.mu) <= 1e-8);
  CHECK((r.u.array() - 1.0).abs().maxCoeff() <= 1e-6);
  CHECK(s_norm(*grid, r.u, 3.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.monotone);
}

TEST_CASE("round sphere stays below the sphere value") {
  const auto line = make_discretization(catalog::round_sphere_4(), 400);
  const SubcriticalSolve r = minimize_subcritical(*line, 3.5, default_initial_factor(*line));
  CHECK(r.converged);
  CHECK(r.residual < 1e-7);
  CHECK(r.u.minCoeff() > 0.0);
  CHECK(r.mu <= functional_Fs(*line, Field::Ones(line->size()), 3.5) + 1e-9);
  CHECK(r.mu <= kSphereY + 1e-4);
  for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] <= r.history[k - 1] * (1 + 1e-13));
}

TEST_CASE("long S3 x S1 prefers a concentrated minimizer") {
  const double L = 20.0;
  const auto line = make_discretization(catalog::product_s3xs1(1.0, L), 400);
  const SubcriticalSolve r = minimize_subcritical(*line, 3.8, default_initial_factor(*line));
  CHECK(r.converged);
  const double vol = 2 * pi * pi * L;
  const double constant_value = 6 * std::pow(vol, 1 - 2 / 3.8);
  CHECK(r.mu < constant_value);
  CHECK(r.mu < 6 * std::sqrt(vol));
  CHECK(r.u.maxCoeff() > 2 * r.u.minCoeff());
  CHECK(euler_lagrange_residual(*line, r.u, 3.8, r.mu) == doctest::Approx(r.residual).epsilon(1e-6).scale(1e-12));
}

TEST_CASE("continuation on the flat torus") {
  const auto grid = make_torus_grid(catalog::flat_torus_4(), {6, 6, 6, 6});
  const ContinuationResult c = continuation_to_critical(*grid);
  CHECK(c.converged);
  REQUIRE(c.y_estimate.has_value());
  CHECK(std::abs(*c.y_estimate) <= 1e-6);
  CHECK(c.steps.size() == kDefaultSchedule.size());
}

TEST_CASE("continuation on S3 x S1 rises towards the sphere value") {
  double previous = -1.0;
  for (double L : {1.0, 5.0, 20.0}) {
    const auto line = make_discretization(catalog::product_s3xs1(1.0, L),
                                          std::max(20, static_cast<int>(std::lround(L / 0.05))));
    const ContinuationResult c = continuation_to_critical(*line);
    CHECK(c.converged);
    CHECK_FALSE(c.blowup);
    REQUIRE(c.y_estimate.has_value());
    CHECK(*c.y_estimate > previous);
    CHECK(*c.y_estimate <= kSphereY + 1e-3);
    CHECK(c.mu_nondecreasing);
    CHECK(c.semicontinuity_holds);
    CHECK(c.sigma_certificate.polished);
    CHECK(c.min_sigma_hat > 0.0);
    for (const auto& st : c.steps) {
      CHECK(st.residual < 1e-7);
      CHECK(st.monotone);
    }
    previous = *c.y_estimate;
  }
}

TEST_CASE("continuation on the round sphere reaches the equality class") {
  const auto line = make_discretization(catalog::round_sphere_4(), 400);
  const ContinuationResult c = continuation_to_critical(*line);
  if (c.blowup) {
    CHECK_FALSE(c.y_estimate.has_value());
  } else {
    REQUIRE(c.y_estimate.has_value());
    CHECK(*c.y_estimate == doctest::Approx(kSphereY).epsilon(0.01));
  }
  CHECK(c.critical_quotient >= *c.y_estimate - 1e-9);
}

TEST_CASE("sigma certificate on a polished solution") {
  const auto line = make_discretization(catalog::product_s3xs1(1.0, 10.0), 200);
  const SubcriticalSolve r = minimize_subcritical(*line, 3.9, default_initial_factor(*line));
  REQUIRE(r.converged);
  const SigmaCertificate cert = certify_sigma_hat(*line, r.u, 3.9, r.mu);
  CHECK(cert.polished);
  CHECK(cert.relative_defect < 1e-30);
  CHECK(cert.min_sigma_hat > 0.0);
  // Where u is not tiny the double evaluation is already accurate.
  const Field sig = sigma_transform(*line, r.u);
  CHECK(cert.min_sigma_hat <= sig.maxCoeff());
}

TEST_CASE("schedule and config validation") {
  const auto line = make_discretization(catalog::round_sphere_4(), 50);
  CHECK_THROWS_AS(continuation_to_critical(*line, {3.0, 3.9, 4.0}), PreconditionError);
  CHECK_THROWS_AS(continuation_to_critical(*line, {3.0, 3.9}), PreconditionError);
  CHECK_THROWS_AS(continuation_to_critical(*line, {3.5, 3.0, 3.96}), PreconditionError);
  CHECK_THROWS_AS(minimize_subcritical(*line, 3.0, -Field::Ones(line->size())), DomainError);

  const YamabeConfig cfg = parse_yamabe_config(R"({"schedule": [3.0, 3.97], "tolerance": 1e-8, "resolution": 90})");
  CHECK(cfg.schedule == std::vector<double>{3.0, 3.97});
  CHECK(cfg.solver.tolerance == 1e-8);
  CHECK(cfg.resolution == 90);
  CHECK_THROWS_AS(parse_yamabe_config("{\"schedule\": 3}"), ParseError);
  CHECK_THROWS_AS(parse_yamabe_config("not json"), ParseError);
}

TEST_CASE("continuation csv layout") {
  const auto line = make_discretization(catalog::round_sphere_4(), 40);
  const ContinuationResult c = continuation_to_critical(*line, {3.0, 3.96});
  const std::string csv = continuation_csv(c);
  CHECK(csv.find("step,s,F_s,residual,max_u") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') >= 3);
}

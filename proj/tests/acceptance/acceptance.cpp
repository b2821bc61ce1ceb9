// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "conformal4/gluing.hpp"
#include "conformal4/manifold_io.hpp"
#include "conformal4/report.hpp"
#include "conformal4/yamabe.hpp"

using namespace conformal4;
using std::numbers::pi;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void euler_characteristics() {
  struct Case {
    const char* name;
    double chi;
  };
  bool ok = true;
  double worst = 0.0, slowest = 0.0;
  for (const Case& c : {Case{"s4", 2}, Case{"t4", 0}, Case{"s3xs1", 0}, Case{"cp2-fs", 3}, Case{"s2xs2", 4}}) {
    const auto t0 = std::chrono::steady_clock::now();
    const ManifoldSpec spec = catalog::by_name(c.name);
    const FunctionalReport r = functional_report(spec, build_quadrature(spec, 48));
    const double dt = seconds_since(t0);
    const double err = std::abs(r.chi_estimate - c.chi);
    worst = std::max(worst, err);
    slowest = std::max(slowest, dt);
    ok = ok && err <= 1e-6 && dt < 60.0;
  }
  verdict(1, ok, "max |chi - chi_exact| = " + fmt("%.3g", worst) + " at m = 48, slowest " + fmt("%.2f", slowest) + " s");
}

void pointwise_sigma() {
  struct Case {
    const char* name;
    double sigma;
  };
  bool ok = true;
  double worst_sigma = 0.0, worst_margin = 0.0;
  std::uint64_t seed = 1;
  for (const Case& c : {Case{"cp2-fs", 0}, Case{"s4", 12}, Case{"s3xs1", 6}, Case{"t4", 0}}) {
    const ManifoldSpec spec = catalog::by_name(c.name);
    for (const QuadratureNode& p : sample_points(spec, 1000, seed++)) {
      const CurvatureBlocks b = decompose(curvature_at(spec, p.chart, p.x));
      worst_sigma = std::max(worst_sigma, std::abs(b.sigma - c.sigma));
      worst_margin = std::max(worst_margin, std::abs(b.pic_margin - b.sigma / 6));
    }
  }
  ok = worst_sigma <= 1e-8 && worst_margin <= 1e-10;
  verdict(2, ok, "max |sigma - exact| = " + fmt("%.3g", worst_sigma) + ", max |pic_margin - sigma/6| = " +
                     fmt("%.3g", worst_margin) + " over 4 x 1000 points");
}

void eigenvalue_bound() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd(0.0, 1.0);
  int violations = 0;
  double min_ratio = 1e300;
  for (int i = 0; i < 100000; ++i) {
    Mat3 m;
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) m(a, b) = m(b, a) = nd(rng);
    m -= (m.trace() / 3) * Mat3::Identity();
    const Vec3 ev = sorted_eigenvalues(m);
    const double lhs = ev.squaredNorm(), rhs = 1.5 * ev(0) * ev(0);
    min_ratio = std::min(min_ratio, lhs / rhs);
    if (lhs < rhs * (1 - 1e-12)) ++violations;
  }
  verdict(3, violations == 0,
          std::to_string(violations) + " violations in 100000 matrices, min ratio " + fmt("%.6f", min_ratio));
}

ManifoldSpec rescaled_torus() {
  const std::string c = "pow(1 + 0.1 * cos(2 * pi * x0), 2)";
  std::string doc = R"({"name": "rescaled-torus", "charts": [{"bounds": [[0, 1], [0, 1], [0, 1], [0, 1]],
      "periodic": [true, true, true, true], "metric": [)";
  for (int i = 0; i < 4; ++i) {
    doc += i ? ", [" : "[";
    for (int j = 0; j < 4; ++j) doc += std::string(j ? ", " : "") + "\"" + (i == j ? c : "0") + "\"";
    doc += "]";
  }
  doc += "]}]}";
  return parse_manifold_json(doc);
}

void conformal_covariance() {
  const ManifoldSpec direct = rescaled_torus();
  auto u_of = [](double x) { return 1 + 0.1 * std::cos(2 * pi * x); };
  // sigma changes sign with cos(2 pi x0), so deviations are relative to max |sigma|
  double worst = 0.0, scale = 0.0;

  const auto line = make_torus_grid(catalog::flat_torus_4(), {32, 1, 1, 1});
  Field u(line->size());
  for (std::size_t i = 0; i < line->size(); ++i) u[i] = u_of(line->point(i)[0]);
  const Field s1 = sigma_transform(*line, u);
  for (std::size_t i = 0; i < line->size(); ++i) {
    const Vec4 x = line->point(i);
    const double ref = decompose(curvature_at(direct, 0, {x[0], 0.5, 0.5, 0.5})).sigma;
    worst = std::max(worst, std::abs(s1[i] - ref));
    scale = std::max(scale, std::abs(ref));
  }

  const auto grid = make_torus_grid(catalog::flat_torus_4(), {16, 16, 16, 16});
  Field v(grid->size());
  for (std::size_t i = 0; i < grid->size(); ++i) v[i] = u_of(grid->point(i)[0]);
  const Field s2 = sigma_transform(*grid, v);
  int spots = 0;
  for (std::size_t i = 0; i < grid->size(); i += 997, ++spots) {
    const double ref = decompose(curvature_at(direct, 0, grid->point(i))).sigma;
    worst = std::max(worst, std::abs(s2[i] - ref));
  }
  verdict(4, worst <= 1e-6 * scale,
          "max deviation / max |sigma| = " + fmt("%.3g", worst / scale) + " over 32 reduced nodes and " + std::to_string(spots) +
              " spots of the 16^4 grid");
}

void pinching_equality() {
  const ManifoldSpec cp2 = catalog::fubini_study_cp2();
  const PinchingResult t = pinching_condition(functional_report(cp2, build_quadrature(cp2, 48)));
  const double target = 8 * pi * pi;
  const bool ok = std::abs(t.relative_gap) < 1e-6 && std::abs(t.lhs - target) <= 1e-6 * target &&
                  std::abs(t.rhs - target) <= 1e-6 * target;
  verdict(5, ok,
          "int lambda_max^2 = " + fmt("%.12g", t.lhs) + ", Y^2/36 = " + fmt("%.12g", t.rhs) + ", 8 pi^2 = " +
              fmt("%.12g", target) + ", relative gap " + fmt("%.3g", t.relative_gap));
}

struct SolverRun {
  double L;
  ContinuationResult result;
  double seconds;
};

std::vector<SolverRun> solver_runs;

void subcritical_solver() {
  bool ok = true;
  std::string detail;

  const auto torus = make_torus_grid(catalog::flat_torus_4(), {8, 8, 8, 8});
  const SubcriticalSolve t = minimize_subcritical(*torus, 3.0, default_initial_factor(*torus));
  const double spread = t.u.maxCoeff() - t.u.minCoeff();
  ok = ok && t.converged && std::abs(t.mu) <= 1e-8 && spread <= 1e-6 && t.residual < 1e-7;
  detail += "T4 mu_3 = " + fmt("%.2g", t.mu) + " (u spread " + fmt("%.1g", spread) + ")";

  const double bound = 8 * std::sqrt(6.0) * pi;
  double previous = -1e300, worst_residual = 0.0, slowest = 0.0;
  for (double L : {1.0, 5.0, 20.0, 80.0}) {
    const ManifoldSpec spec = catalog::product_s3xs1(1.0, L);
    const auto line = make_discretization(spec, std::max(20, static_cast<int>(std::lround(L / 0.05))));
    const auto t0 = std::chrono::steady_clock::now();
    ContinuationResult c = continuation_to_critical(*line);
    const double dt = seconds_since(t0);
    slowest = std::max(slowest, dt / static_cast<double>(c.steps.size()));
    for (const auto& st : c.steps) worst_residual = std::max(worst_residual, st.residual);
    const double y = c.y_estimate.value_or(std::nan(""));
    ok = ok && c.converged && c.y_estimate && y > previous && y <= bound + 1e-3;
    detail += fmt(", L=%g: ", L) + fmt("%.8f", y);
    previous = y;
    solver_runs.push_back({L, std::move(c), dt});
  }
  ok = ok && worst_residual < 1e-7 && slowest < 30.0;
  detail += fmt(" (bound %.8f)", bound) + ", max residual " + fmt("%.2g", worst_residual) + ", slowest solve " +
            fmt("%.2f", slowest) + " s";
  verdict(6, ok, detail);
}

void positive_sigma_hat() {
  bool ok = !solver_runs.empty();
  std::string detail;
  for (const SolverRun& r : solver_runs) {
    if (!r.result.y_estimate || *r.result.y_estimate <= 0.0) continue;
    const SigmaCertificate& c = r.result.sigma_certificate;
    ok = ok && c.min_sigma_hat > 0.0;
    if (!detail.empty()) detail += "; ";
    detail += fmt("L=%g ", r.L) + "min sigma_hat " + fmt("%.6g", c.min_sigma_hat) +
              (c.polished ? " (polished)" : " (double)");
  }
  verdict(7, ok, detail);
}

void gluing_suite() {
  const ConnectedSumReport rep = verify_connected_sum(GlueRecipe{});
  double fitted_c = 0.0;
  bool one_sided = true;
  for (const GlueRow& r : rep.rows) {
    fitted_c = std::max(fitted_c, r.l * r.gap);
    one_sided = one_sided && r.gap >= 0.0;
  }
  bool decay = true;
  for (const GlueRow& r : rep.rows) decay = decay && r.gap <= fitted_c / r.l;
  const bool ok = rep.slice_bounded && std::abs(rep.flatten_exponent - 2.0) <= 0.2 && rep.gap_decreasing &&
                  one_sided && decay;
  std::string gaps;
  for (const GlueRow& r : rep.rows) gaps += fmt(" %.3g", r.gap);
  verdict(8, ok,
          "slice l*E max " + fmt("%.4g", rep.slice_c) + (rep.slice_bounded ? " bounded" : " unbounded") +
              ", flatten exponent " + fmt("%.4f", rep.flatten_exponent) + ", gaps" + gaps + " (C = " +
              fmt("%.4g", fitted_c) + (rep.gap_decreasing ? ", decreasing)" : ", not decreasing)"));
}

void determinism() {
  std::vector<RunRecipe> recipes(5);
  recipes[0].command = "gbchern", recipes[0].manifold = "cp2-fs", recipes[0].resolution = 48;
  recipes[1].command = "yamabe", recipes[1].manifold = "s3xs1";
  recipes[2].command = "glue";
  recipes[3].command = "catalog";
  recipes[4].command = "decompose", recipes[4].manifold = "s2xs2", recipes[4].format = OutputFormat::Csv;
  int identical = 0;
  for (const RunRecipe& r : recipes) {
    const RunResult a = run(r), b = run(r);
    if (a.exit_code == b.exit_code && a.report == b.report && !a.report.empty()) ++identical;
    else
      std::fprintf(stderr, "%s: exit %d/%d, %zu/%zu bytes %s\n", r.command.c_str(), a.exit_code, b.exit_code,
                   a.report.size(), b.report.size(), a.error.c_str());
  }
  verdict(9, identical == static_cast<int>(recipes.size()),
          std::to_string(identical) + " of " + std::to_string(recipes.size()) + " recipes byte-identical on rerun");
}

}  // namespace

int main() {
  euler_characteristics();
  pointwise_sigma();
  eigenvalue_bound();
  conformal_covariance();
  pinching_equality();
  subcritical_solver();
  positive_sigma_hat();
  gluing_suite();
  determinism();
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

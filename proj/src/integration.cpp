#include "conformal4/integration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "conformal4/errors.hpp"
#include "conformal4/geometry.hpp"
#include "conformal4/summation.hpp"

namespace conformal4 {

void gauss_legendre(int m, double lo, double hi, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(m, 0.0);
  weights.assign(m, 0.0);
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (m == 1) p0 = 1.0;
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= m; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = m * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = mid - half * x;
    nodes[m - 1 - i] = mid + half * x;
    weights[i] = weights[m - 1 - i] = half * w;
  }
}

std::size_t ChartRule::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.nodes.size();
  return n;
}

std::size_t QuadratureRule::node_count() const {
  std::size_t n = 0;
  for (const auto& c : charts) n += c.size();
  return n;
}

namespace {

template <class F>
void for_each_node(const ChartRule& cr, F&& f) {
  const auto& a = cr.axes;
  for (std::size_t i0 = 0; i0 < a[0].nodes.size(); ++i0)
    for (std::size_t i1 = 0; i1 < a[1].nodes.size(); ++i1)
      for (std::size_t i2 = 0; i2 < a[2].nodes.size(); ++i2)
        for (std::size_t i3 = 0; i3 < a[3].nodes.size(); ++i3) {
          const Vec4 x{a[0].nodes[i0], a[1].nodes[i1], a[2].nodes[i2], a[3].nodes[i3]};
          const double w = a[0].weights[i0] * a[1].weights[i1] * a[2].weights[i2] * a[3].weights[i3];
          f(x, w);
        }
}

std::string describe_node(const std::string& chart, const Vec4& x) {
  std::ostringstream os;
  os.precision(17);
  os << " [chart '" << chart << "', node (" << x[0] << ", " << x[1] << ", " << x[2] << ", " << x[3] << ")]";
  return os.str();
}

// Re-raises a pointwise failure with the node location appended.
[[noreturn]] void rethrow_at(const Error& e, const std::string& where) {
  const std::string msg = std::string(e.what()) + where;
  const std::string kind = e.kind();
  if (kind == "domain-error") throw DomainError(msg);
  if (kind == "metric-degeneracy") throw MetricDegeneracyError(msg);
  if (kind == "internal-consistency") throw ConsistencyError(msg);
  if (kind == "precondition") throw PreconditionError(msg);
  if (kind == "non-convergence") throw ConvergenceError(msg);
  throw ParseError(msg);
}

void check_cyclic_axis(const ChartDomain& chart, int axis) {
  const Vec4 x0 = chart.reference_point;
  for (double frac : {0.0, 1.0 / 3.0}) {
    Vec4 x = x0;
    x[axis] = chart.box[axis].lo + (0.5 + frac) * chart.box[axis].length();
    if (!chart.contains(x)) continue;
    const MetricJet jet = evaluate_jet(chart, x);
    const double scale = std::max(1.0, jet.g.cwiseAbs().maxCoeff());
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (std::abs(jet.dg(axis, i, j)) > 1e-12 * scale)
          throw PreconditionError("axis " + std::to_string(axis) + " of chart '" + chart.name +
                                  "' is declared cyclic but the metric depends on it");
    if (chart.weight && std::abs(chart.partition_weight(x) - chart.partition_weight(x0)) > 1e-14)
      throw PreconditionError("axis " + std::to_string(axis) + " of chart '" + chart.name +
                              "' is declared cyclic but the partition weight depends on it");
  }
}

}  // namespace

QuadratureRule build_quadrature(const ManifoldSpec& spec, int m, const QuadratureOptions& options) {
  if (m < 4) throw PreconditionError("quadrature resolution must be at least 4, got " + std::to_string(m));
  QuadratureRule rule;
  rule.m = m;
  rule.options = options;
  for (std::size_t c = 0; c < spec.charts.size(); ++c) {
    const ChartDomain& chart = spec.charts[c];
    if (!chart.integrate) continue;
    ChartRule cr;
    cr.chart = static_cast<int>(c);
    for (int a = 0; a < 4; ++a) {
      const Interval iv = chart.box[a];
      if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.hi > iv.lo))
        throw PreconditionError("chart '" + chart.name + "' has an unbounded axis and cannot be integrated");
      AxisRule& ax = cr.axes[a];
      if (chart.periodic[a] && chart.cyclic[a] && options.exploit_cyclic) {
        check_cyclic_axis(chart, a);
        ax.nodes = {iv.mid()};
        ax.weights = {iv.length()};
      } else if (chart.periodic[a]) {
        const double h = iv.length() / m;
        for (int k = 0; k < m; ++k) {
          ax.nodes.push_back(iv.lo + (k + 0.5) * h);
          ax.weights.push_back(h);
        }
      } else {
        const double shrink = std::min(options.boundary_shrink, 0.25 * iv.length());
        gauss_legendre(m, iv.lo + shrink, iv.hi - shrink, ax.nodes, ax.weights);
      }
    }
    rule.charts.push_back(std::move(cr));
  }
  if (rule.charts.empty()) throw PreconditionError("manifold '" + spec.name + "' has no integration chart");
  return rule;
}

std::vector<QuadratureNode> QuadratureRule::nodes(const ManifoldSpec& spec) const {
  std::vector<QuadratureNode> out;
  out.reserve(node_count());
  for (const ChartRule& cr : charts) {
    const ChartDomain& chart = spec.charts[cr.chart];
    for_each_node(cr, [&](const Vec4& x, double w) {
      try {
        const MetricJet jet = evaluate_jet(chart, x);
        out.push_back({cr.chart, x, w * jet.sqrt_det() * chart.partition_weight(x)});
      } catch (const Error& e) {
        rethrow_at(e, describe_node(chart.name, x));
      }
    });
  }
  return out;
}

double integrate_volume(const ManifoldSpec& spec, const QuadratureRule& rule) {
  PairwiseSum v;
  for (const auto& n : rule.nodes(spec)) v.add(n.weight);
  return v.value();
}

const char* to_string(SigmaMode mode) { return mode == SigmaMode::Full ? "full" : "plus"; }

SigmaMode parse_sigma_mode(const std::string& text) {
  if (text == "full") return SigmaMode::Full;
  if (text == "plus") return SigmaMode::Plus;
  throw ParseError("sigma mode must be 'full' or 'plus', got '" + text + "'");
}

double modified_f(const CurvatureBlocks& b, SigmaMode mode) {
  return mode == SigmaMode::Full ? 6.0 * std::max(b.lambda_max_plus, b.lambda_max_minus) : 6.0 * b.lambda_max_plus;
}

FunctionalReport functional_report(const ManifoldSpec& spec, const QuadratureRule& rule, SigmaMode mode) {
  FunctionalReport rep;
  rep.manifold = spec.name;
  rep.mode = mode;
  rep.m = rule.m;
  rep.node_count = rule.node_count();

  PairwiseSum vol, scal, ftot, wp, wm, r2, ric0, lam2;
  constexpr double inf = std::numeric_limits<double>::infinity();
  rep.sigma_min = rep.sigma_plus_min = rep.scalar_min = inf;
  rep.sigma_max = rep.sigma_plus_max = rep.scalar_max = -inf;

  struct Stat {
    double sigma, sigma_plus, scalar, ric0;
    bool trusted;
  };
  std::vector<Stat> stats;
  stats.reserve(rep.node_count);

  for (const ChartRule& cr : rule.charts) {
    const ChartDomain& chart = spec.charts[cr.chart];
    for_each_node(cr, [&](const Vec4& x, double w_axes) {
      try {
        const MetricJet jet = evaluate_jet(chart, x);
        const double w = w_axes * jet.sqrt_det() * chart.partition_weight(x);
        const CurvaturePoint cp = curvature(jet, spec.orientation);
        const CurvatureBlocks b = decompose(cp);
        const double R = cp.scalar;
        const double r0 = cp.ric0_norm2();
        const double lmax = std::max(b.lambda_max_plus, b.lambda_max_minus);
        vol.add(w);
        scal.add(w * R);
        ftot.add(w * modified_f(b, mode));
        wp.add(w * b.wplus_norm2());
        wm.add(w * b.wminus_norm2());
        r2.add(w * R * R / 24.0);
        ric0.add(w * r0 / 2.0);
        lam2.add(w * lmax * lmax);
        Eigen::SelfAdjointEigenSolver<Mat4> es(jet.g, Eigen::EigenvaluesOnly);
        const double cond = es.eigenvalues()[3] / es.eigenvalues()[0];
        stats.push_back({b.sigma, b.sigma_plus, R, r0, cond <= kStatConditionLimit});
      } catch (const Error& e) {
        rethrow_at(e, describe_node(chart.name, x));
      }
    });
  }

  const bool any_trusted = std::any_of(stats.begin(), stats.end(), [](const Stat& s) { return s.trusted; });
  for (const Stat& st : stats) {
    if (any_trusted && !st.trusted) continue;
    ++rep.stat_nodes;
    rep.sigma_min = std::min(rep.sigma_min, st.sigma);
    rep.sigma_max = std::max(rep.sigma_max, st.sigma);
    rep.sigma_plus_min = std::min(rep.sigma_plus_min, st.sigma_plus);
    rep.sigma_plus_max = std::max(rep.sigma_plus_max, st.sigma_plus);
    rep.scalar_min = std::min(rep.scalar_min, st.scalar);
    rep.scalar_max = std::max(rep.scalar_max, st.scalar);
    rep.ric0_max = std::max(rep.ric0_max, st.ric0);
  }

  rep.volume = vol.value();
  if (!(rep.volume > 0.0)) throw ConsistencyError("non-positive volume for '" + spec.name + "'");
  const double sqrt_v = std::sqrt(rep.volume);
  rep.total_scalar = scal.value();
  rep.yamabe_quotient = rep.total_scalar / sqrt_v;
  rep.f_total = ftot.value();
  rep.generalized_quotient = (rep.total_scalar - rep.f_total) / sqrt_v;
  rep.gb = {wp.value(), wm.value(), r2.value(), ric0.value()};
  rep.chi_estimate = (rep.gb.wplus + rep.gb.wminus + rep.gb.scalar_sq - rep.gb.ric0_half) /
                     (8.0 * std::numbers::pi * std::numbers::pi);
  rep.lambda_sq_integral = lam2.value();

  const double rscale = std::max({1.0, std::abs(rep.scalar_min), std::abs(rep.scalar_max)});
  rep.einstein = rep.ric0_max <= 1e-12 * rscale * rscale && (rep.scalar_max - rep.scalar_min) <= 1e-6 * rscale;
  return rep;
}

std::vector<QuadratureNode> sample_points(const ManifoldSpec& spec, std::size_t count, std::uint64_t seed) {
  // A coarse rule bounds the density; the margin covers the gaps between nodes.
  const QuadratureRule coarse = build_quadrature(spec, 16, {1e-6, false});
  std::vector<double> chart_volume, density_max;
  for (const ChartRule& cr : coarse.charts) {
    const ChartDomain& chart = spec.charts[cr.chart];
    PairwiseSum v;
    double dmax = 0.0;
    for_each_node(cr, [&](const Vec4& x, double w) {
      const double d = evaluate_jet(chart, x).sqrt_det() * chart.partition_weight(x);
      v.add(w * d);
      dmax = std::max(dmax, d);
    });
    chart_volume.push_back(v.value());
    density_max.push_back(1.5 * dmax);
  }
  double total = 0.0;
  for (double v : chart_volume) total += v;

  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  std::vector<QuadratureNode> out;
  out.reserve(count);
  while (out.size() < count) {
    std::size_t c = 0;
    double pick = uniform() * total;
    while (c + 1 < chart_volume.size() && pick > chart_volume[c]) pick -= chart_volume[c++];
    const ChartDomain& chart = spec.charts[coarse.charts[c].chart];
    Vec4 x;
    for (int a = 0; a < 4; ++a) {
      const Interval iv = chart.box[a];
      x[a] = iv.lo + (1e-9 + (1.0 - 2e-9) * uniform()) * iv.length();
    }
    const double d = evaluate_jet(chart, x).sqrt_det() * chart.partition_weight(x);
    if (d > density_max[c])
      throw ConsistencyError("volume density exceeds its sampled bound in chart '" + chart.name + "'");
    if (uniform() * density_max[c] < d) out.push_back({coarse.charts[c].chart, x, d});
  }
  return out;
}

FunctionalReport functional_report_checked(const ManifoldSpec& spec, int m, SigmaMode mode,
                                           const QuadratureOptions& options) {
  FunctionalReport fine = functional_report(spec, build_quadrature(spec, m, options), mode);
  const int coarse_m = std::max(4, m / 2);
  if (coarse_m < m) {
    const FunctionalReport coarse = functional_report(spec, build_quadrature(spec, coarse_m, options), mode);
    fine.chi_convergence = std::abs(fine.chi_estimate - coarse.chi_estimate);
    fine.volume_convergence = std::abs(fine.volume - coarse.volume);
  }
  return fine;
}

const char* to_string(PinchingVerdict v) {
  switch (v) {
    case PinchingVerdict::Strict: return "strict";
    case PinchingVerdict::Equality: return "equality";
    case PinchingVerdict::Violated: return "violated";
  }
  return "unknown";
}

PinchingResult pinching_condition(const FunctionalReport& report, std::optional<double> y_estimate) {
  PinchingResult r;
  if (y_estimate) {
    r.y_value = *y_estimate;
    r.y_source = "supplied";
  } else {
    if (!report.einstein)
      throw PreconditionError("metric on '" + report.manifold +
                              "' is not Einstein; a Yamabe estimate must be supplied");
    r.y_value = report.yamabe_quotient;
    r.y_source = "einstein-quotient";
  }
  r.lhs = report.lambda_sq_integral;
  r.rhs = r.y_value * r.y_value / 36.0;
  r.y_positive = r.y_value > 0.0;
  const double scale = std::max(std::abs(r.lhs), std::abs(r.rhs));
  const double gap = r.rhs - r.lhs;
  r.relative_gap = scale > 0.0 ? gap / scale : 0.0;
  const double tol = std::max(1e-6 * scale, 1e-12);
  if (std::abs(gap) <= tol) r.verdict = PinchingVerdict::Equality;
  else if (gap > 0.0) r.verdict = PinchingVerdict::Strict;
  else r.verdict = PinchingVerdict::Violated;
  return r;
}

}  // namespace conformal4

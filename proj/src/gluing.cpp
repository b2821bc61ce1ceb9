#include "conformal4/gluing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "conformal4/decomposition.hpp"
#include "conformal4/errors.hpp"
#include "conformal4/geometry.hpp"

namespace conformal4 {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kS3Area = 2.0 * kPi * kPi;

std::pair<double, double> warp_value(const WarpFunction& w, double t) {
  const auto [a, b] = w(Jet4(t));
  return {a.v, b.v};
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Field initial_factor(const GluedManifold& m, const WarpedLine& line, GlueInit init) {
  Field u(static_cast<Eigen::Index>(line.size()));
  for (std::size_t i = 0; i < line.size(); ++i) {
    const double tau = line.coordinate(i);
    u[static_cast<Eigen::Index>(i)] =
        init == GlueInit::Uniform ? 1.0 : std::exp(-std::max(0.0, tau - m.neck_start)) + 1e-3;
  }
  return u;
}

// F_s(U) - F_s(u) from the increments, accurate when both are tiny.
double quotient_increment(const WarpedLine& line, const Field& u, const TransplantResult& tr, double s) {
  const double e = line.integral(line.sigma().cwiseProduct(u).cwiseProduct(u)) + 6.0 * line.dirichlet_energy(u);
  const double n = line.integral(u.array().abs().pow(s).matrix());
  const double rho = std::log1p(tr.norm_increment / n);
  return std::pow(n, -2.0 / s) * (tr.energy_increment * std::exp(-(2.0 / s) * rho) + e * std::expm1(-(2.0 / s) * rho));
}

}  // namespace

double CutoffProfile::derivative(double t) {
  if (t <= 0.5 || t >= 1.0) return 0.0;
  const double y = 2.0 * t - 1.0;
  return 60.0 * y * y * (1.0 - y) * (1.0 - y);
}

double CutoffProfile::second_derivative(double t) {
  if (t <= 0.5 || t >= 1.0) return 0.0;
  const double y = 2.0 * t - 1.0;
  return 240.0 * y * (1.0 - y) * (1.0 - 2.0 * y);
}

RadialProfile round_s4_profile(double radius) {
  if (!(radius > 0.0)) throw PreconditionError("sphere radius must be positive");
  return {"round-s4", [radius](const Jet4& r) { return radius * sin(r / radius); }, kPi * radius};
}

RadialProfile flat_profile() {
  return {"flat", [](const Jet4& r) { return r; }, std::numeric_limits<double>::infinity()};
}

FlattenResult flatten_near_point(const RadialProfile& profile, double delta) {
  if (!(delta > 0.0) || !(delta < 0.5 * profile.r_max))
    throw PreconditionError("flattening radius must satisfy 0 < delta < r_max / 2 for profile '" + profile.name + "'");
  FlattenResult out;
  out.original = profile;
  out.delta = delta;
  auto b0 = profile.b;
  out.flattened = {profile.name + "-flattened",
                   [b0, delta](const Jet4& r) {
                     const Jet4 xi = CutoffProfile::value(r / delta);
                     const Jet4 b = b0(r);
                     return sqrt(r * r + xi * (b * b - r * r));
                   },
                   profile.r_max};

  const ChartDomain chart = make_warped_chart(
      "flattened", [f = out.flattened.b](const Jet4& r) { return std::pair<Jet4, Jet4>(Jet4(1.0), f(r)); },
      Interval{0.0, profile.r_max});
  const int samples = 2000;
  for (int k = 0; k < samples; ++k) {
    const double r = delta * (k + 0.5) / samples;
    const double b = profile.b(Jet4(r)).v;
    const double xi = CutoffProfile::value(r / delta);
    out.defect = std::max(out.defect, (1.0 - xi) * std::abs(r * r - b * b) / (b * b));
    const CurvaturePoint cp = curvature(evaluate_jet(chart, {r, kPi / 4, kPi, kPi}));
    Eigen::SelfAdjointEigenSolver<Mat6> es(curvature_operator(cp), Eigen::EigenvaluesOnly);
    out.curvature_sup = std::max(out.curvature_sup, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  out.fitted_c = out.defect / (delta * delta);
  return out;
}

CylinderProfile cylinder_rescale(const FlattenResult& flat) {
  CylinderProfile out;
  out.flat = flat;
  out.t_pole = -std::log(flat.flattened.r_max);
  out.t_junction = std::log(4.0 / flat.delta);
  const double delta = flat.delta;
  auto b = flat.flattened.b;
  // r = e^{-t}; sqrt(factor) = exp((1 - xi) t), so A = sqrt(factor) r = exp(-xi t).
  out.warp = [b, delta](const Jet4& t) {
    const Jet4 r = exp(-t);
    const Jet4 xi = CutoffProfile::value(2.0 * r / delta);
    return std::pair<Jet4, Jet4>(exp(-(xi * t)), exp((1.0 - xi) * t) * b(r));
  };
  return out;
}

WarpFunction piece_with_end(const CylinderProfile& piece) {
  return [w = piece.warp, tj = piece.t_junction](const Jet4& t) {
    if (t.v <= tj) return w(t);
    return std::pair<Jet4, Jet4>(Jet4(1.0), Jet4(1.0));
  };
}

GluedManifold glue(const CylinderProfile& piece1, const CylinderProfile& piece2, double l) {
  if (!(l > 0.0)) throw PreconditionError("neck length must be positive");
  for (const CylinderProfile* p : {&piece1, &piece2})
    if (!std::isfinite(p->t_pole)) throw PreconditionError("glued pieces must be compact (closed at a pole)");
  GluedManifold m;
  m.piece1 = piece1;
  m.piece2 = piece2;
  m.l = l;
  m.neck_start = piece1.t_junction;
  m.neck_end = piece1.t_junction + l;
  m.range = Interval{piece1.t_pole, m.neck_end + (piece2.t_junction - piece2.t_pole)};
  const double mirror = piece2.t_junction + m.neck_end;
  m.warp = [w1 = piece1.warp, w2 = piece2.warp, ns = m.neck_start, ne = m.neck_end, mirror](const Jet4& tau) {
    if (tau.v <= ns) return w1(tau);
    if (tau.v <= ne) return std::pair<Jet4, Jet4>(Jet4(1.0), Jet4(1.0));
    return w2(mirror - tau);
  };
  const auto [a1, b1] = warp_value(piece1.warp, piece1.t_junction);
  const auto [a2, b2] = warp_value(piece2.warp, piece2.t_junction);
  m.junction_jump = std::max({std::abs(a1 - 1.0), std::abs(b1 - 1.0), std::abs(a2 - 1.0), std::abs(b2 - 1.0)});
  return m;
}

std::unique_ptr<WarpedLine> glued_line(const GluedManifold& m, double h, SigmaMode mode) {
  if (!(h > 0.0)) throw PreconditionError("grid step must be positive");
  const int cells = std::max(3, static_cast<int>(std::lround(m.range.length() / h)));
  std::ostringstream name;
  name << "glued-l" << m.l;
  return std::make_unique<WarpedLine>(name.str(), m.warp, m.range, false, cells, mode);
}

double warped_volume(const WarpFunction& warp, Interval range, double panel) {
  const int panels = std::max(1, static_cast<int>(std::ceil(range.length() / panel)));
  const double w = range.length() / panels;
  std::vector<double> x, g;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    gauss_legendre(8, range.lo + p * w, range.lo + (p + 1) * w, x, g);
    for (std::size_t q = 0; q < x.size(); ++q) {
      const auto [a, b] = warp_value(warp, x[q]);
      total += g[q] * a * b * b * b;
    }
  }
  return kS3Area * total;
}

SliceResult best_slice(const std::vector<double>& t, const std::vector<double>& u, const std::vector<double>& du) {
  if (t.empty() || t.size() != u.size() || t.size() != du.size())
    throw PreconditionError("slice samples must be non-empty and of equal length");
  SliceResult out;
  out.energy = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double e = kS3Area * (du[i] * du[i] + u[i] * u[i]);
    sum += e;
    if (e < out.energy) {
      out.energy = e;
      out.node = i;
      out.t = t[i];
    }
  }
  out.mean_energy = sum / static_cast<double>(t.size());
  out.bound_holds = out.energy <= out.mean_energy * (1.0 + 1e-12);
  return out;
}

SliceResult best_slice(const GluedManifold& m, const WarpedLine& line, const Field& u) {
  std::vector<double> t, v, dv;
  std::vector<std::size_t> nodes;
  const double h = line.step();
  for (std::size_t i = 1; i + 1 < line.size(); ++i) {
    const double tau = line.coordinate(i);
    if (tau < m.neck_start || tau > m.neck_end) continue;
    const auto k = static_cast<Eigen::Index>(i);
    t.push_back(tau);
    v.push_back(u[k]);
    dv.push_back((u[k + 1] - u[k - 1]) / (2.0 * h));
    nodes.push_back(i);
  }
  if (t.empty()) throw PreconditionError("the neck contains no grid nodes; refine the grid");
  SliceResult out = best_slice(t, v, dv);
  out.node = nodes[out.node];
  return out;
}

TransplantResult transplant(const GluedManifold& m, const WarpedLine& line, const Field& u, const SliceResult& slice,
                            double s) {
  const double h = line.step();
  const int n = static_cast<int>(line.size());
  const int j = static_cast<int>(slice.node);
  const int ramp = static_cast<int>(std::ceil(1.0 / h)) + 2;
  const double ul = u[j];
  auto ramp_value = [ul](double d) { return d >= 1.0 ? 0.0 : (1.0 - d) * ul; };

  TransplantResult out;
  out.s = s;
  const int k1 = j + 1 + ramp;
  out.piece1.line = std::make_unique<WarpedLine>("piece1-with-end", piece_with_end(m.piece1),
                                                 Interval{m.range.lo, m.range.lo + k1 * h}, false, k1, line.mode());
  out.piece1.values.resize(k1);
  for (int i = 0; i < k1; ++i)
    out.piece1.values[i] = i <= j ? u[i] : ramp_value(out.piece1.line->coordinate(i) - slice.t);

  const int k2 = (n - j) + ramp;
  out.piece2.line = std::make_unique<WarpedLine>("piece2-with-end", piece_with_end(m.piece2),
                                                 Interval{m.piece2.t_pole, m.piece2.t_pole + k2 * h}, false, k2,
                                                 line.mode());
  out.piece2.values.resize(k2);
  for (int k = 0; k < k2; ++k) {
    const int i = n - 1 - k;
    out.piece2.values[k] = i >= j ? u[i] : ramp_value(static_cast<double>(j - i) * h);
  }

  auto increments = [&](const PieceFunction& p, int last_shared) {
    const WarpedLine& pl = *p.line;
    const Field& v = p.values;
    for (int i = last_shared + 1; i < static_cast<int>(v.size()); ++i) {
      out.energy_increment += pl.measure()[i] * pl.sigma()[i] * v[i] * v[i];
      out.norm_increment += pl.measure()[i] * std::pow(std::abs(v[i]), s);
    }
    for (int i = last_shared; i + 1 < static_cast<int>(v.size()); ++i) {
      const double dv = v[i + 1] - v[i];
      out.energy_increment += 6.0 * pl.conductance()[i + 1] * dv * dv;
    }
  };
  increments(out.piece1, j);
  increments(out.piece2, n - 1 - j);
  out.energy_increment += line.measure()[j] * line.sigma()[j] * ul * ul;
  out.norm_increment += line.measure()[j] * std::pow(ul, s);

  for (const PieceFunction* p : {&out.piece1, &out.piece2}) {
    const WarpedLine& pl = *p->line;
    const Field& v = p->values;
    out.energy += pl.integral(pl.sigma().cwiseProduct(v).cwiseProduct(v)) + 6.0 * pl.dirichlet_energy(v);
    out.norm_s += pl.integral(v.array().abs().pow(s).matrix());
  }
  out.quotient = out.energy / std::pow(out.norm_s, 2.0 / s);
  return out;
}

GlueRecipe parse_glue_recipe(const std::string& json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_object()) throw ParseError("glue recipe must be a JSON object");
  GlueRecipe r;
  try {
    if (doc.contains("pieces")) {
      const json& p = doc.at("pieces");
      if (!p.is_array() || p.size() != 2) throw ParseError("'pieces' must list exactly two pieces");
      for (int k = 0; k < 2; ++k) {
        const std::string kind = p[k].value("kind", std::string("round-s4"));
        if (kind != "round-s4") throw ParseError("unsupported piece kind '" + kind + "' (supported: round-s4)");
        RadialProfile prof = round_s4_profile(p[k].value("radius", 1.0));
        const double delta = p[k].value("delta", 0.2);
        (k == 0 ? r.piece1 : r.piece2) = prof;
        (k == 0 ? r.delta1 : r.delta2) = delta;
      }
    }
    if (doc.contains("lengths")) r.lengths = doc.at("lengths").get<std::vector<double>>();
    if (doc.contains("epsilon")) r.epsilon = doc.at("epsilon").get<double>();
    if (doc.contains("s")) r.s = doc.at("s").get<double>();
    if (doc.contains("h")) r.h = doc.at("h").get<double>();
    if (doc.contains("init")) {
      const std::string init = doc.at("init").get<std::string>();
      if (init != "uniform" && init != "piece") throw ParseError("'init' must be 'uniform' or 'piece'");
      r.init = init == "uniform" ? GlueInit::Uniform : GlueInit::Piece;
    }
    if (doc.contains("tolerance")) r.solver.tolerance = doc.at("tolerance").get<double>();
    if (doc.contains("max_iterations")) r.solver.max_iterations = doc.at("max_iterations").get<int>();
    if (doc.contains("flatten_deltas")) r.flatten_deltas = doc.at("flatten_deltas").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed glue recipe: ") + e.what());
  } catch (const PreconditionError& e) {
    throw ParseError(std::string("malformed glue recipe: ") + e.what());
  }
  if (r.lengths.empty()) throw ParseError("'lengths' must not be empty");
  if (!(r.h > 0.0) || !(r.epsilon > 0.0) || !(r.solver.tolerance > 0.0))
    throw ParseError("'h', 'epsilon' and 'tolerance' must be positive");
  return r;
}

ConnectedSumReport verify_connected_sum(const GlueRecipe& recipe) {
  for (double l : recipe.lengths)
    if (!(l > 0.0)) throw PreconditionError("neck lengths must be positive");
  if (!(recipe.s > 2.0 && recipe.s < 4.0)) throw PreconditionError("exponent s must lie in (2, 4)");

  ConnectedSumReport rep;
  rep.cylinder_reading =
      "implemented: g multiplied by exp(-(1 - xi(2r/delta)) log r^2), equal to 1 for r >= delta/2 and r^-2 for "
      "r <= delta/4; literal: exp(-xi(2r/delta) log r^2), which is r^-2 for r >= delta/2 and does not produce "
      "half cylinders";

  std::vector<double> ld, lf;
  for (double d : recipe.flatten_deltas) {
    const FlattenResult f = flatten_near_point(recipe.piece1, d);
    rep.flatten_deltas.push_back(d);
    rep.flatten_defects.push_back(f.defect);
    rep.flatten_curvature.push_back(f.curvature_sup);
    rep.flatten_c = std::max(rep.flatten_c, f.fitted_c);
    ld.push_back(std::log(d));
    lf.push_back(std::log(f.defect));
  }
  if (ld.size() >= 2) rep.flatten_exponent = slope(ld, lf);

  const CylinderProfile c1 = cylinder_rescale(flatten_near_point(recipe.piece1, recipe.delta1));
  const CylinderProfile c2 = cylinder_rescale(flatten_near_point(recipe.piece2, recipe.delta2));
  const double vol_pieces = warped_volume(c1.warp, {c1.t_pole, c1.t_junction}) +
                            warped_volume(c2.warp, {c2.t_pole, c2.t_junction});

  std::vector<double> lengths = recipe.lengths;
  std::sort(lengths.begin(), lengths.end());
  for (double l : lengths) {
    const GluedManifold m = glue(c1, c2, l);
    const auto line = glued_line(m, recipe.h);
    GlueRow row;
    row.l = l;
    row.junction_jump = m.junction_jump;
    row.volume = warped_volume(m.warp, m.range);
    row.volume_pieces = vol_pieces + kS3Area * l;
    for (std::size_t i = 0; i < line->size(); ++i) {
      const double tau = line->coordinate(i);
      if (tau >= m.neck_start && tau <= m.neck_end)
        row.neck_sigma_error = std::max(row.neck_sigma_error, std::abs(line->sigma()[static_cast<Eigen::Index>(i)] - 6.0));
    }

    const Field init = initial_factor(m, *line, recipe.init);
    auto run = [&](const SolverOptions& opt, SubcriticalSolve& solve, SliceResult& slice, TransplantResult& tr) {
      solve = minimize_subcritical(*line, recipe.s, init, opt);
      slice = best_slice(m, *line, solve.u);
      tr = transplant(m, *line, solve.u, slice, recipe.s);
      return quotient_increment(*line, solve.u, tr, recipe.s);
    };
    SubcriticalSolve solve;
    SliceResult slice;
    TransplantResult tr;
    row.gap = run(recipe.solver, solve, slice, tr);
    row.mu = solve.mu;
    row.residual = solve.residual;
    row.converged = solve.converged;
    row.slice_t = slice.t - m.neck_start;
    row.slice_energy = slice.energy;
    row.slice_bound_holds = slice.bound_holds;
    row.union_norm = tr.norm_s;
    row.union_quotient = tr.quotient;
    const Eigen::Index n = solve.u.size();
    for (Eigen::Index i = 0; i < n; ++i)
      row.mirror_defect = std::max(row.mirror_defect, std::abs(solve.u[i] - solve.u[n - 1 - i]));
    row.mirror_defect /= solve.u.maxCoeff();

    SolverOptions relaxed = recipe.solver;
    relaxed.tolerance *= 2.0;
    SubcriticalSolve solve2;
    SliceResult slice2;
    TransplantResult tr2;
    row.gap_relaxed = run(relaxed, solve2, slice2, tr2);
    rep.rows.push_back(row);
  }

  rep.gap_decreasing = true;
  rep.epsilon_stable = true;
  double first_slice = 0.0;
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    const GlueRow& r = rep.rows[k];
    if (k > 0 && !(r.gap < rep.rows[k - 1].gap)) rep.gap_decreasing = false;
    if (std::abs(r.gap - r.gap_relaxed) > recipe.epsilon) rep.epsilon_stable = false;
    rep.gap_c = std::max(rep.gap_c, r.l * r.gap);
    rep.slice_c = std::max(rep.slice_c, r.l * r.slice_energy);
    if (k == 0) first_slice = r.l * r.slice_energy;
  }
  rep.slice_bounded = rep.slice_c <= 2.0 * first_slice;
  return rep;
}

std::string glue_csv(const ConnectedSumReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "# conformal4 glue v1\n";
  os << "l,mu,residual,slice_t,slice_energy,union_norm,gap\n";
  for (const GlueRow& r : report.rows)
    os << r.l << "," << r.mu << "," << r.residual << "," << r.slice_t << "," << r.slice_energy << "," << r.union_norm
       << "," << r.gap << "\n";
  return os.str();
}

}  // namespace conformal4

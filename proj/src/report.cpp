#include "conformal4/report.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "conformal4/decomposition.hpp"
#include "conformal4/discretization.hpp"
#include "conformal4/geometry.hpp"
#include "conformal4/gluing.hpp"
#include "conformal4/manifold_io.hpp"
#include "conformal4/yamabe.hpp"

namespace conformal4 {

namespace {

using ojson = nlohmann::ordered_json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Non-finite values are not representable in JSON; they become strings.
ojson jnum(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

ojson jmat(const Eigen::MatrixXd& m) {
  ojson rows = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ojson r = ojson::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(jnum(m(i, j)));
    rows.push_back(r);
  }
  return rows;
}

ojson jvec(const std::vector<double>& v) {
  ojson a = ojson::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

struct Csv {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  void add(std::vector<std::string> r) { rows.push_back(std::move(r)); }
};

struct CommandOutput {
  ojson metadata = ojson::object();
  ojson result = ojson::object();
  Csv csv;
  bool converged = true;
};

void add_quantity(CommandOutput& out, const std::string& name, double v) {
  out.result[name] = jnum(v);
  out.csv.add({name, num(v)});
}

void add_matrix_rows(Csv& csv, const std::string& name, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      csv.add({name + "_" + std::to_string(i) + std::to_string(j), num(m(i, j))});
}

ManifoldSpec load_spec(const RunRecipe& r) {
  ManifoldSpec spec = resolve_manifold(r.manifold);
  if (r.orientation && *r.orientation < 0) spec = reversed(spec);
  return spec;
}

Vec4 reference_point(const ManifoldSpec& spec) { return spec.charts.at(0).reference_point; }

ojson point_json(const Vec4& x) { return ojson::array({x[0], x[1], x[2], x[3]}); }

CommandOutput cmd_curvature(const RunRecipe& r) {
  const ManifoldSpec spec = load_spec(r);
  const Vec4 x = reference_point(spec);
  const CurvaturePoint cp = curvature(evaluate_jet(spec, 0, x), spec.orientation);
  CommandOutput out;
  out.metadata["chart"] = spec.charts[0].name;
  out.metadata["point"] = point_json(x);
  out.csv.columns = {"quantity", "value"};
  out.result["metric"] = jmat(cp.g);
  add_matrix_rows(out.csv, "g", cp.g);
  out.result["ricci"] = jmat(cp.ric);
  add_matrix_rows(out.csv, "ric", cp.ric);
  add_quantity(out, "scalar", cp.scalar);
  add_quantity(out, "ric0_norm2", cp.ric0_norm2());
  ojson sec = ojson::object();
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      const double den = cp.g(a, a) * cp.g(b, b) - cp.g(a, b) * cp.g(a, b);
      const double k = cp.riem(a, b, a, b) / den;
      const std::string key = "K" + std::to_string(a) + std::to_string(b);
      sec[key] = jnum(k);
      out.csv.add({"sectional_" + key, num(k)});
    }
  out.result["sectional"] = sec;
  return out;
}

CommandOutput cmd_decompose(const RunRecipe& r) {
  const ManifoldSpec spec = load_spec(r);
  const Vec4 x = reference_point(spec);
  const CurvatureBlocks b = decompose(curvature(evaluate_jet(spec, 0, x), spec.orientation), spec.orientation);
  CommandOutput out;
  out.metadata["chart"] = spec.charts[0].name;
  out.metadata["point"] = point_json(x);
  out.metadata["orientation"] = spec.orientation;
  out.metadata["weyl_norm"] = "sum of squared eigenvalues of the 3x3 block";
  out.csv.columns = {"quantity", "value"};
  out.result["A"] = jmat(b.A);
  out.result["B"] = jmat(b.B);
  out.result["C"] = jmat(b.C);
  add_matrix_rows(out.csv, "A", b.A);
  add_matrix_rows(out.csv, "B", b.B);
  add_matrix_rows(out.csv, "C", b.C);
  out.result["wplus_eigs"] = jvec({b.wplus_eigs[0], b.wplus_eigs[1], b.wplus_eigs[2]});
  out.result["wminus_eigs"] = jvec({b.wminus_eigs[0], b.wminus_eigs[1], b.wminus_eigs[2]});
  for (int i = 0; i < 3; ++i) {
    out.csv.add({"wplus_eig_" + std::to_string(i), num(b.wplus_eigs[i])});
    out.csv.add({"wminus_eig_" + std::to_string(i), num(b.wminus_eigs[i])});
  }
  add_quantity(out, "R", b.R);
  add_quantity(out, "wplus_norm2", b.wplus_norm2());
  add_quantity(out, "wminus_norm2", b.wminus_norm2());
  add_quantity(out, "lambda_max_plus", b.lambda_max_plus);
  add_quantity(out, "lambda_max_minus", b.lambda_max_minus);
  add_quantity(out, "sigma", b.sigma);
  add_quantity(out, "sigma_plus", b.sigma_plus);
  add_quantity(out, "pic_margin", b.pic_margin);
  add_quantity(out, "p_plus_min", b.p_plus_min);
  add_quantity(out, "p_minus_min", b.p_minus_min);
  return out;
}

void quadrature_metadata(CommandOutput& out, const FunctionalReport& rep) {
  out.metadata["quadrature"] = {{"rule", "gauss-legendre per chart axis"},
                                {"m", rep.m},
                                {"nodes", rep.node_count},
                                {"stat_nodes", rep.stat_nodes},
                                {"boundary_shrink", QuadratureOptions{}.boundary_shrink}};
  out.metadata["sigma_mode"] = to_string(rep.mode);
}

CommandOutput cmd_gbchern(const RunRecipe& r) {
  const ManifoldSpec spec = load_spec(r);
  const int m = r.resolution > 0 ? r.resolution : 48;
  const FunctionalReport rep = functional_report_checked(spec, m, r.sigma_mode);
  CommandOutput out;
  quadrature_metadata(out, rep);
  out.csv.columns = {"quantity", "value"};
  add_quantity(out, "chi_estimate", rep.chi_estimate);
  add_quantity(out, "chi_nearest_integer", std::round(rep.chi_estimate));
  add_quantity(out, "volume", rep.volume);
  add_quantity(out, "int_wplus2", rep.gb.wplus);
  add_quantity(out, "int_wminus2", rep.gb.wminus);
  add_quantity(out, "int_scalar2_over_24", rep.gb.scalar_sq);
  add_quantity(out, "int_ric0_2_over_2", rep.gb.ric0_half);
  if (rep.chi_convergence) add_quantity(out, "chi_change_from_half_resolution", *rep.chi_convergence);
  return out;
}

CommandOutput cmd_invariant(const RunRecipe& r) {
  const ManifoldSpec spec = load_spec(r);
  const int m = r.resolution > 0 ? r.resolution : 32;
  const FunctionalReport rep = functional_report_checked(spec, m, r.sigma_mode);
  CommandOutput out;
  quadrature_metadata(out, rep);
  out.csv.columns = {"quantity", "value"};
  add_quantity(out, "volume", rep.volume);
  add_quantity(out, "total_scalar", rep.total_scalar);
  add_quantity(out, "yamabe_quotient", rep.yamabe_quotient);
  add_quantity(out, "f_total", rep.f_total);
  add_quantity(out, "generalized_quotient", rep.generalized_quotient);
  add_quantity(out, "lambda_max_sq_integral", rep.lambda_sq_integral);
  add_quantity(out, "sigma_min", rep.sigma_min);
  add_quantity(out, "sigma_max", rep.sigma_max);
  add_quantity(out, "sigma_plus_min", rep.sigma_plus_min);
  add_quantity(out, "sigma_plus_max", rep.sigma_plus_max);
  add_quantity(out, "einstein", rep.einstein ? 1.0 : 0.0);
  out.result["einstein"] = rep.einstein;
  if (rep.einstein) {
    const PinchingResult t = pinching_condition(rep);
    out.result["pinching"] = {{"lhs", jnum(t.lhs)},
                              {"rhs", jnum(t.rhs)},
                              {"y_value", jnum(t.y_value)},
                              {"y_source", t.y_source},
                              {"verdict", to_string(t.verdict)},
                              {"relative_gap", jnum(t.relative_gap)}};
    out.csv.add({"pinching_lhs", num(t.lhs)});
    out.csv.add({"pinching_rhs", num(t.rhs)});
    out.csv.add({"pinching_relative_gap", num(t.relative_gap)});
  } else {
    out.result["pinching"] = nullptr;
  }
  return out;
}

CommandOutput cmd_pic(const RunRecipe& r) {
  const ManifoldSpec spec = load_spec(r);
  const int m = r.resolution > 0 ? r.resolution : 8;
  const QuadratureRule rule = build_quadrature(spec, m);
  PicVerdict worst = PicVerdict::Positive;
  double margin = std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  for (const QuadratureNode& q : rule.nodes(spec)) {
    const MetricJet jet = evaluate_jet(spec, q.chart, q.x);
    Eigen::SelfAdjointEigenSolver<Mat4> es(jet.g, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().maxCoeff() > kStatConditionLimit * es.eigenvalues().minCoeff()) continue;
    const PicResult p = pic_verdict(decompose(curvature(jet, spec.orientation), spec.orientation));
    margin = std::min(margin, p.margin);
    if (static_cast<int>(p.verdict) > static_cast<int>(worst)) worst = p.verdict;
    ++used;
  }
  if (used == 0) throw ConsistencyError("no well-conditioned quadrature node for the PIC check");
  CommandOutput out;
  out.metadata["quadrature"] = {{"m", m}, {"nodes_checked", used}};
  out.csv.columns = {"quantity", "value"};
  out.result["verdict"] = to_string(worst);
  out.csv.add({"verdict", to_string(worst)});
  add_quantity(out, "margin", margin);
  return out;
}

int default_line_cells(const ManifoldSpec& spec) {
  if (spec.kind == ManifoldKind::ProductS3xS1)
    return std::max(20, static_cast<int>(std::lround(spec.param("L") / 0.05)));
  if (spec.kind == ManifoldKind::FlatTorus4) return 8;
  return 400;
}

CommandOutput cmd_yamabe(const RunRecipe& r, const std::string& config_text) {
  const ManifoldSpec spec = load_spec(r);
  const YamabeConfig cfg = config_text.empty() ? YamabeConfig{} : parse_yamabe_config(config_text);
  const int res = cfg.resolution > 0 ? cfg.resolution : (r.resolution > 0 ? r.resolution : default_line_cells(spec));
  const auto disc = make_discretization(spec, res, r.sigma_mode);
  const ContinuationResult c = continuation_to_critical(*disc, cfg.schedule, cfg.solver);
  CommandOutput out;
  out.metadata["discretization"] = disc->describe();
  out.metadata["sigma_mode"] = to_string(r.sigma_mode);
  out.metadata["solver"] = {{"method", "preconditioned projected descent, Barzilai-Borwein steps"},
                            {"tolerance", cfg.solver.tolerance},
                            {"max_iterations", cfg.solver.max_iterations},
                            {"schedule", cfg.schedule}};
  ojson steps = ojson::array();
  out.csv.columns = {"step", "s", "F_s", "residual", "max_u"};
  for (std::size_t k = 0; k < c.steps.size(); ++k) {
    const SubcriticalSolve& st = c.steps[k];
    steps.push_back({{"s", st.s},
                     {"mu", jnum(st.mu)},
                     {"residual", jnum(st.residual)},
                     {"iterations", st.iterations},
                     {"converged", st.converged},
                     {"max_u", jnum(st.max_u)},
                     {"half_max_radius", jnum(st.half_max_radius)}});
    out.csv.add({std::to_string(k), num(st.s), num(st.mu), num(st.residual), num(st.max_u)});
  }
  out.result["status"] = c.status;
  out.result["y_estimate"] = c.y_estimate ? jnum(*c.y_estimate) : ojson(nullptr);
  out.result["blowup"] = c.blowup;
  out.result["critical_quotient"] = jnum(c.critical_quotient);
  out.result["min_sigma_hat"] = jnum(c.min_sigma_hat);
  out.result["sigma_hat_polished"] = c.sigma_certificate.polished;
  out.result["mu_nondecreasing"] = c.mu_nondecreasing;
  out.result["semicontinuity_holds"] = c.semicontinuity_holds;
  out.result["steps"] = steps;
  out.converged = c.converged || c.blowup;
  return out;
}

CommandOutput cmd_glue(const std::string& config_text) {
  const GlueRecipe recipe = config_text.empty() ? GlueRecipe{} : parse_glue_recipe(config_text);
  const ConnectedSumReport rep = verify_connected_sum(recipe);
  CommandOutput out;
  out.metadata["pieces"] = {recipe.piece1.name, recipe.piece2.name};
  out.metadata["delta"] = {recipe.delta1, recipe.delta2};
  out.metadata["s"] = recipe.s;
  out.metadata["h"] = recipe.h;
  out.metadata["epsilon"] = recipe.epsilon;
  out.metadata["init"] = recipe.init == GlueInit::Uniform ? "uniform" : "piece";
  out.metadata["solver"] = {{"tolerance", recipe.solver.tolerance}, {"max_iterations", recipe.solver.max_iterations}};
  out.metadata["cylinder_reading"] = rep.cylinder_reading;
  out.csv.columns = {"l", "mu", "residual", "slice_t", "slice_energy", "union_norm", "gap"};
  ojson rows = ojson::array();
  for (const GlueRow& g : rep.rows) {
    rows.push_back({{"l", g.l},
                    {"mu", jnum(g.mu)},
                    {"residual", jnum(g.residual)},
                    {"converged", g.converged},
                    {"slice_t", jnum(g.slice_t)},
                    {"slice_energy", jnum(g.slice_energy)},
                    {"slice_bound_holds", g.slice_bound_holds},
                    {"union_norm", jnum(g.union_norm)},
                    {"union_quotient", jnum(g.union_quotient)},
                    {"gap", jnum(g.gap)},
                    {"gap_relaxed", jnum(g.gap_relaxed)},
                    {"volume", jnum(g.volume)},
                    {"volume_pieces", jnum(g.volume_pieces)},
                    {"junction_jump", jnum(g.junction_jump)},
                    {"neck_sigma_error", jnum(g.neck_sigma_error)},
                    {"mirror_defect", jnum(g.mirror_defect)}});
    out.csv.add({num(g.l), num(g.mu), num(g.residual), num(g.slice_t), num(g.slice_energy), num(g.union_norm),
                 num(g.gap)});
    out.converged = out.converged && g.converged;
  }
  out.result["rows"] = rows;
  out.result["flatten"] = {{"deltas", jvec(rep.flatten_deltas)},
                           {"defects", jvec(rep.flatten_defects)},
                           {"curvature_sup", jvec(rep.flatten_curvature)},
                           {"exponent", jnum(rep.flatten_exponent)},
                           {"fitted_c", jnum(rep.flatten_c)}};
  out.result["gap_decreasing"] = rep.gap_decreasing;
  out.result["gap_c"] = jnum(rep.gap_c);
  out.result["slice_c"] = jnum(rep.slice_c);
  out.result["slice_bounded"] = rep.slice_bounded;
  out.result["epsilon_stable"] = rep.epsilon_stable;
  return out;
}

ojson optional_json(const std::optional<double>& v) { return v ? jnum(*v) : ojson(nullptr); }

CommandOutput cmd_catalog(const RunRecipe& r) {
  const std::vector<CatalogRow> table = catalog_table(r.resolution > 0 ? r.resolution : 16);
  CommandOutput out;
  out.metadata["quadrature_m"] = r.resolution > 0 ? r.resolution : 16;
  out.csv.columns = {"manifold",       "sigma_min",         "sigma_max",      "sigma_plus_min",
                     "sigma_plus_max", "F_f",               "class_value",    "class_provenance",
                     "GY",             "GY_provenance"};
  ojson rows = ojson::array();
  for (const CatalogRow& c : table) {
    rows.push_back({{"manifold", c.manifold},
                    {"sigma_min", jnum(c.sigma_min)},
                    {"sigma_max", jnum(c.sigma_max)},
                    {"sigma_plus_min", jnum(c.sigma_plus_min)},
                    {"sigma_plus_max", jnum(c.sigma_plus_max)},
                    {"F_f", jnum(c.f_functional)},
                    {"F_f_provenance", "computed"},
                    {"einstein", c.einstein},
                    {"class_value", optional_json(c.class_value)},
                    {"class_provenance", c.class_provenance},
                    {"GY", optional_json(c.invariant_value)},
                    {"GY_provenance", c.invariant_provenance},
                    {"note", c.invariant_note}});
    out.csv.add({c.manifold, num(c.sigma_min), num(c.sigma_max), num(c.sigma_plus_min), num(c.sigma_plus_max),
                 num(c.f_functional), c.class_value ? num(*c.class_value) : "", c.class_provenance,
                 c.invariant_value ? num(*c.invariant_value) : "", c.invariant_provenance});
  }
  out.result["rows"] = rows;
  return out;
}

std::string render(const RunRecipe& r, const std::string& hash, const ojson& recipe_json, CommandOutput& out) {
  if (r.format == OutputFormat::Json) {
    ojson doc;
    doc["tool"] = "conformal4";
    doc["version"] = kToolVersion;
    doc["command"] = r.command;
    doc["recipe_hash"] = hash;
    doc["recipe"] = recipe_json;
    doc["metadata"] = out.metadata;
    doc["converged"] = out.converged;
    doc["result"] = out.result;
    return doc.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "# conformal4 " << r.command << " v1\n";
  os << "# version=" << kToolVersion << " recipe_hash=" << hash << "\n";
  for (std::size_t i = 0; i < out.csv.columns.size(); ++i) os << (i ? "," : "") << out.csv.columns[i];
  os << "\n";
  for (const auto& row : out.csv.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

OutputFormat parse_output_format(const std::string& text) {
  if (text == "json") return OutputFormat::Json;
  if (text == "csv") return OutputFormat::Csv;
  throw ParseError("format must be 'json' or 'csv', got '" + text + "'");
}

std::string canonical_recipe(const RunRecipe& r, const std::string& config_text) {
  std::ostringstream os;
  os << "command=" << r.command << "\nmanifold=" << r.manifold << "\nresolution=" << r.resolution
     << "\nformat=" << (r.format == OutputFormat::Json ? "json" : "csv")
     << "\norientation=" << (r.orientation ? std::to_string(*r.orientation) : "default")
     << "\nsigma_mode=" << to_string(r.sigma_mode) << "\nconfig=" << config_text;
  return os.str();
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const ParseError*>(&e)) return 4;
  if (dynamic_cast<const ConvergenceError*>(&e) || dynamic_cast<const ConsistencyError*>(&e)) return 3;
  return 2;
}

std::string error_json(const std::string& kind, const std::string& message, int exit_code) {
  ojson e;
  e["error"] = kind;
  e["message"] = message;
  e["exit_code"] = exit_code;
  return e.dump();
}

RunResult run(const RunRecipe& recipe) {
  RunResult res;
  try {
    bool known = false;
    for (const auto& c : kCommands) known = known || c == recipe.command;
    if (!known) throw ParseError("unknown command '" + recipe.command + "'");
    if (recipe.resolution < 0) throw PreconditionError("resolution must be non-negative");

    const std::string config_text = recipe.config.empty() ? std::string() : read_text_file(recipe.config);
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_recipe(recipe, config_text))));
    ojson rj;
    rj["manifold"] = recipe.command == "glue" || recipe.command == "catalog" ? ojson(nullptr) : ojson(recipe.manifold);
    rj["resolution"] = recipe.resolution;
    rj["config"] = recipe.config.empty() ? ojson(nullptr) : ojson(recipe.config);
    rj["orientation"] = recipe.orientation ? ojson(*recipe.orientation) : ojson(nullptr);
    rj["sigma_mode"] = to_string(recipe.sigma_mode);

    CommandOutput out;
    const std::string& c = recipe.command;
    if (c == "curvature") out = cmd_curvature(recipe);
    else if (c == "decompose") out = cmd_decompose(recipe);
    else if (c == "gbchern") out = cmd_gbchern(recipe);
    else if (c == "invariant") out = cmd_invariant(recipe);
    else if (c == "pic") out = cmd_pic(recipe);
    else if (c == "yamabe") out = cmd_yamabe(recipe, config_text);
    else if (c == "glue") out = cmd_glue(config_text);
    else out = cmd_catalog(recipe);

    res.report = render(recipe, hash, rj, out);
    if (!out.converged) {
      res.exit_code = 3;
      res.error = error_json("non-convergence", "solver did not reach the requested tolerance; see report", 3);
    }
  } catch (const Error& e) {
    res.exit_code = exit_code_for(e);
    res.error = error_json(e.kind(), e.what(), res.exit_code);
  }
  return res;
}

std::vector<CatalogRow> catalog_table(int resolution) {
  const double y_s4 = 8.0 * std::sqrt(6.0) * std::numbers::pi;
  struct Entry {
    std::string name;
    std::optional<double> gy;
    std::string note;
  };
  const std::vector<Entry> entries{
      {"s4", std::nullopt, "not listed among the worked examples"},
      {"cp2-fs", 0.0, "GY(CP^2) = 0"},
      {"cp2-bar", 0.0, "connected-sum family with k2 = 1"},
      {"t4", 0.0, "GY(T^4) = 0"},
      {"s3xs1", y_s4, "GY(S^3 x S^1) = Y(S^4) = 8 sqrt(6) pi"},
      {"s2xs2", std::nullopt, "not listed among the worked examples"},
  };
  std::vector<CatalogRow> rows;
  for (const Entry& e : entries) {
    const ManifoldSpec spec = catalog::by_name(e.name);
    const FunctionalReport rep = functional_report(spec, build_quadrature(spec, resolution), SigmaMode::Full);
    CatalogRow row;
    row.manifold = e.name;
    row.sigma_min = rep.sigma_min;
    row.sigma_max = rep.sigma_max;
    row.sigma_plus_min = rep.sigma_plus_min;
    row.sigma_plus_max = rep.sigma_plus_max;
    row.f_functional = rep.generalized_quotient;
    row.einstein = rep.einstein;
    if (rep.einstein) {
      row.class_value = rep.generalized_quotient;
      row.class_provenance = "computed";
    } else {
      row.class_provenance = "not-available";
    }
    row.invariant_value = e.gy;
    row.invariant_provenance = e.gy ? "paper-asserted" : "not-stated";
    row.invariant_note = e.note;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace conformal4

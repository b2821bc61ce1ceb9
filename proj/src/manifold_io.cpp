#include "conformal4/manifold_io.hpp"

#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "conformal4/errors.hpp"
#include "conformal4/expression.hpp"

namespace conformal4 {

using nlohmann::json;

namespace {

Expression coefficient(const json& v, const std::string& where) {
  if (v.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return Expression::parse(os.str());
  }
  if (!v.is_string()) throw ParseError(where + ": expected an expression string or a number");
  try {
    return Expression::parse(v.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

std::array<bool, 4> flags(const json& c, const char* key) {
  std::array<bool, 4> out{};
  if (!c.contains(key)) return out;
  const json& a = c.at(key);
  if (!a.is_array() || a.size() != 4) throw ParseError(std::string("'") + key + "' must list 4 booleans");
  for (int i = 0; i < 4; ++i) {
    if (!a[i].is_boolean()) throw ParseError(std::string("'") + key + "' must list 4 booleans");
    out[i] = a[i].get<bool>();
  }
  return out;
}

double bound_value(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    Expression e = coefficient(v, "bounds");
    if (!e.is_constant()) throw ParseError("bounds must not depend on coordinates");
    return e.evaluate<double>({0, 0, 0, 0});
  }
  throw ParseError("bounds entries must be numbers or constant expressions");
}

ChartDomain parse_chart(const json& c, std::size_t index) {
  const std::string where = "chart " + std::to_string(index);
  if (!c.is_object()) throw ParseError(where + " must be an object");
  ChartDomain chart;
  chart.name = c.value("name", where);

  if (!c.contains("bounds")) throw ParseError(where + ": missing 'bounds'");
  const json& b = c.at("bounds");
  if (!b.is_array() || b.size() != 4) throw ParseError(where + ": 'bounds' must hold 4 intervals");
  for (int a = 0; a < 4; ++a) {
    if (!b[a].is_array() || b[a].size() != 2) throw ParseError(where + ": each bound is [lo, hi]");
    chart.box[a] = Interval{bound_value(b[a][0]), bound_value(b[a][1])};
    if (!(chart.box[a].hi > chart.box[a].lo) || !std::isfinite(chart.box[a].length()))
      throw ParseError(where + ": bound " + std::to_string(a) + " must satisfy lo < hi, both finite");
  }
  chart.periodic = flags(c, "periodic");
  chart.cyclic = flags(c, "cyclic");
  chart.integrate = c.value("integrate", true);

  if (!c.contains("metric")) throw ParseError(where + ": missing 'metric'");
  const json& m = c.at("metric");
  if (!m.is_array() || m.size() != 4) throw ParseError(where + ": 'metric' must be a 4x4 array");
  auto coeffs = std::make_shared<std::array<std::array<Expression, 4>, 4>>();
  for (int i = 0; i < 4; ++i) {
    if (!m[i].is_array() || m[i].size() != 4) throw ParseError(where + ": 'metric' must be a 4x4 array");
    for (int j = 0; j < 4; ++j)
      (*coeffs)[i][j] = coefficient(m[i][j], where + " metric[" + std::to_string(i) + "][" + std::to_string(j) + "]");
  }
  chart.metric = [coeffs](const Point4J& x) {
    MetricMatrixJ g;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) g[i][j] = (*coeffs)[i][j].evaluate<Jet4>(x);
    return g;
  };

  if (c.contains("weight")) {
    auto w = std::make_shared<Expression>(coefficient(c.at("weight"), where + " weight"));
    chart.weight = [w](const Vec4& x) { return w->evaluate<double>(x); };
  }

  for (int a = 0; a < 4; ++a) chart.reference_point[a] = chart.box[a].mid();
  if (c.contains("reference_point")) {
    const json& r = c.at("reference_point");
    if (!r.is_array() || r.size() != 4) throw ParseError(where + ": 'reference_point' needs 4 numbers");
    for (int a = 0; a < 4; ++a) {
      if (!r[a].is_number()) throw ParseError(where + ": 'reference_point' needs 4 numbers");
      chart.reference_point[a] = r[a].get<double>();
    }
  }
  return chart;
}

int orientation_value(const json& o) {
  if (o.is_number_integer()) {
    const int v = o.get<int>();
    if (v == 1 || v == -1) return v;
  } else if (o.is_string()) {
    return parse_orientation(o.get<std::string>());
  }
  throw ParseError("orientation must be +1, -1, \"+\" or \"-\"");
}

}  // namespace

int parse_orientation(const std::string& text) {
  if (text == "+" || text == "+1" || text == "1") return 1;
  if (text == "-" || text == "-1") return -1;
  throw ParseError("orientation must be '+' or '-', got '" + text + "'");
}

ManifoldSpec parse_manifold_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_object()) throw ParseError("manifold document must be a JSON object");

  try {
    if (doc.contains("catalog")) {
      std::map<std::string, double> params;
      if (doc.contains("params")) {
        if (!doc.at("params").is_object()) throw ParseError("'params' must be an object");
        for (const auto& [k, v] : doc.at("params").items()) {
          if (!v.is_number()) throw ParseError("parameter '" + k + "' must be a number");
          params[k] = v.get<double>();
        }
      }
      ManifoldSpec spec = catalog::by_name(doc.at("catalog").get<std::string>(), params);
      if (doc.contains("orientation") && orientation_value(doc.at("orientation")) == -1) spec = reversed(spec);
      return spec;
    }

    ManifoldSpec spec;
    spec.kind = ManifoldKind::CustomChart;
    spec.name = doc.value("name", std::string("custom-chart"));
    if (doc.contains("orientation")) spec.orientation = orientation_value(doc.at("orientation"));
    if (!doc.contains("charts") || !doc.at("charts").is_array() || doc.at("charts").empty())
      throw ParseError("custom manifold needs a non-empty 'charts' array");
    std::size_t i = 0;
    for (const json& c : doc.at("charts")) spec.charts.push_back(parse_chart(c, i++));
    return spec;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed manifold document: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ManifoldSpec load_manifold_file(const std::string& path) { return parse_manifold_json(read_text_file(path)); }

ManifoldSpec resolve_manifold(const std::string& name_or_path, const std::map<std::string, double>& params) {
  for (const auto& n : catalog::names())
    if (n == name_or_path) return catalog::by_name(n, params);
  if (name_or_path.find('/') == std::string::npos && name_or_path.find(".json") == std::string::npos) {
    try {
      return catalog::by_name(name_or_path, params);
    } catch (const ParseError&) {
    }
  }
  return load_manifold_file(name_or_path);
}

}  // namespace conformal4

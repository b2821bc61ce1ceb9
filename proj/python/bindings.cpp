#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "conformal4/integration.hpp"
#include "conformal4/manifold_io.hpp"
#include "conformal4/report.hpp"

namespace py = pybind11;
using namespace conformal4;

namespace {

py::dict blocks_dict(const CurvatureBlocks& b) {
  py::dict d;
  d["R"] = b.R;
  d["sigma"] = b.sigma;
  d["sigma_plus"] = b.sigma_plus;
  d["pic_margin"] = b.pic_margin;
  d["wplus_eigs"] = std::vector<double>{b.wplus_eigs[0], b.wplus_eigs[1], b.wplus_eigs[2]};
  d["wminus_eigs"] = std::vector<double>{b.wminus_eigs[0], b.wminus_eigs[1], b.wminus_eigs[2]};
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Curvature decomposition, Yamabe-type functionals and gluing checks on four-manifolds";
  m.attr("__version__") = kToolVersion;

  py::register_exception<Error>(m, "Error");

  m.def("manifolds", &catalog::names, "Catalog manifold names.");

  m.def(
      "run",
      [](const std::string& command, const std::string& manifold, int resolution, const std::string& config,
         const std::string& format, std::optional<std::string> orientation, const std::string& sigma_mode) {
        RunRecipe r;
        r.command = command;
        r.manifold = manifold;
        r.resolution = resolution;
        r.config = config;
        r.format = parse_output_format(format);
        r.sigma_mode = parse_sigma_mode(sigma_mode);
        if (orientation) r.orientation = parse_orientation(*orientation);
        const RunResult res = run(r);
        return py::make_tuple(res.exit_code, res.report, res.error);
      },
      py::arg("command"), py::arg("manifold") = "s4", py::arg("resolution") = 0, py::arg("config") = "",
      py::arg("format") = "json", py::arg("orientation") = py::none(), py::arg("sigma_mode") = "full",
      "Runs one CLI command; returns (exit_code, report, error_json).");

  m.def(
      "decompose_at",
      [](const std::string& manifold, const std::vector<double>& x, int chart) {
        if (x.size() != 4) throw ParseError("x must have four coordinates");
        const ManifoldSpec spec = resolve_manifold(manifold);
        return blocks_dict(decompose(curvature_at(spec, chart, Vec4{x[0], x[1], x[2], x[3]})));
      },
      py::arg("manifold"), py::arg("x"), py::arg("chart") = 0);

  m.def(
      "euler_characteristic",
      [](const std::string& manifold, int resolution) {
        const ManifoldSpec spec = resolve_manifold(manifold);
        return functional_report(spec, build_quadrature(spec, resolution)).chi_estimate;
      },
      py::arg("manifold"), py::arg("resolution") = 48);
}

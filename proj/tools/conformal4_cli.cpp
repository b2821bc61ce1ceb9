#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "conformal4/manifold_io.hpp"
#include "conformal4/report.hpp"

using namespace conformal4;

int main(int argc, char** argv) {
  CLI::App app{"conformal invariants of explicit 4-manifold metrics"};
  app.set_version_flag("--version", std::string("conformal4 ") + kToolVersion);

  RunRecipe recipe;
  std::string format = "json", orientation, sigma_mode = "full", out_path;
  app.add_option("command", recipe.command, "curvature|decompose|gbchern|invariant|pic|yamabe|glue|catalog")
      ->required();
  app.add_option("--manifold", recipe.manifold, "catalog name or path to a manifold JSON document");
  app.add_option("--resolution", recipe.resolution, "quadrature nodes per axis, grid size or cell count");
  app.add_option("--config", recipe.config, "solver config (yamabe) or glue recipe (glue)");
  app.add_option("--out", out_path, "write the report here instead of stdout");
  app.add_option("--format", format, "json|csv");
  app.add_option("--orientation", orientation, "+ keeps the declared orientation, - reverses it");
  app.add_option("--sigma-mode", sigma_mode, "full|plus");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json("parse-error", e.what(), 4) << "\n";
    return 4;
  }

  try {
    recipe.format = parse_output_format(format);
    recipe.sigma_mode = parse_sigma_mode(sigma_mode);
    if (!orientation.empty()) recipe.orientation = parse_orientation(orientation);
  } catch (const Error& e) {
    const int code = exit_code_for(e);
    std::cerr << error_json(e.kind(), e.what(), code) << "\n";
    return code;
  }

  const RunResult res = run(recipe);
  if (!res.report.empty()) {
    if (out_path.empty()) {
      std::cout << res.report;
    } else {
      std::ofstream out(out_path, std::ios::binary);
      out << res.report;
      if (!out) {
        std::cerr << error_json("precondition", "cannot write '" + out_path + "'", 2) << "\n";
        return 2;
      }
    }
  }
  if (!res.error.empty()) std::cerr << res.error << "\n";
  return res.exit_code;
}

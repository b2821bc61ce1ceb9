#pragma once

// Recipes, command dispatch and report serialization for the command-line tool.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "conformal4/errors.hpp"
#include "conformal4/integration.hpp"

namespace conformal4 {

inline constexpr const char* kToolVersion = "0.1.0";

std::uint64_t fnv1a64(std::string_view bytes);

enum class OutputFormat { Json, Csv };
OutputFormat parse_output_format(const std::string& text);

inline const std::vector<std::string> kCommands{"curvature", "decompose", "gbchern", "invariant",
                                                "pic",       "yamabe",    "glue",    "catalog"};

struct RunRecipe {
  std::string command;
  std::string manifold = "s4";
  int resolution = 0;  // 0 picks a per-command default
  std::string config;  // path to a solver config (yamabe) or glue recipe (glue)
  OutputFormat format = OutputFormat::Json;
  std::optional<int> orientation;  // -1 reverses the declared orientation, +1 keeps it
  SigmaMode sigma_mode = SigmaMode::Full;
};

// Canonical text of the recipe, including the contents of the config file.
std::string canonical_recipe(const RunRecipe& recipe, const std::string& config_text);

struct RunResult {
  // 0 success, 2 precondition, 3 non-convergence (report still produced), 4 parse error
  int exit_code = 0;
  std::string report;
  std::string error;  // JSON object, empty on success
};

// Never throws for library errors; they are mapped to exit codes.
RunResult run(const RunRecipe& recipe);

int exit_code_for(const Error& e);
std::string error_json(const std::string& kind, const std::string& message, int exit_code);

struct CatalogRow {
  std::string manifold;
  double sigma_min = 0.0, sigma_max = 0.0;
  double sigma_plus_min = 0.0, sigma_plus_max = 0.0;
  double f_functional = 0.0;  // F_f of the catalog metric
  bool einstein = false;
  // Value of the invariant in the class of the catalog metric; set when the
  // metric is Einstein, which attains it.
  std::optional<double> class_value;
  std::string class_provenance;  // "computed" or "not-available"
  std::optional<double> invariant_value;  // GY(M), the supremum over classes
  std::string invariant_provenance;       // "paper-asserted" or "not-stated"
  std::string invariant_note;
};

std::vector<CatalogRow> catalog_table(int resolution = 16);

}  // namespace conformal4

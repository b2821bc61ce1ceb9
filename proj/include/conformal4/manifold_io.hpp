#pragma once

// JSON ingestion of manifold descriptions. Two document shapes are accepted:
//
//   {"catalog": "s3xs1", "params": {"L": 20}, "orientation": "-"}
//   {"name": "...", "orientation": 1, "charts": [{
//       "bounds": [[lo, hi] x4], "periodic": [bool x4], "cyclic": [bool x4],
//       "metric": [[expr x4] x4], "weight": expr, "reference_point": [x4]}]}
//
// Coefficient expressions use the grammar documented in expression.hpp.
// Every malformed document raises ParseError.

#include <string>

#include "conformal4/manifold.hpp"

namespace conformal4 {

ManifoldSpec parse_manifold_json(const std::string& text);
ManifoldSpec load_manifold_file(const std::string& path);

// A catalog name, or otherwise a path to a JSON document.
ManifoldSpec resolve_manifold(const std::string& name_or_path,
                              const std::map<std::string, double>& params = {});

int parse_orientation(const std::string& text);

// Reads a whole file; a missing or unreadable file is a ParseError.
std::string read_text_file(const std::string& path);

}  // namespace conformal4

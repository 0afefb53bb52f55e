#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ghisd/plan.hpp"

namespace ghisd {

enum class GraphFormat { kJson, kDot };

/// Serializes a graph. JSON output is byte-stable for a fixed graph: keys
/// sorted, floats at 9 significant digits. Grid states above
/// `inline_state_limit` entries are referenced by relative file path
/// ("states/<label>.f64") instead of being embedded.
std::string export_graph(const LandscapeGraph& graph, GraphFormat format,
                         std::size_t inline_state_limit = 10000);

/// Rebuilds a graph from its JSON export. File-referenced states are
/// resolved relative to `base_dir`.
LandscapeGraph import_graph_json(const std::string& text, const std::filesystem::path& base_dir);

/// Full run description parsed from a config file.
struct RunSpec {
  SystemSpec system;
  SearchConfig search;
  SymmetrySpec symmetry;
  std::vector<Seed> seeds;
  std::vector<PlanDirective> plan;
  int threads = 1;
};

/// Parses and validates a JSON config document. Throws ValidationError
/// naming the offending field.
RunSpec parse_run_spec(const std::string& text);
RunSpec load_run_spec(const std::filesystem::path& path);

/// Raw little-endian float64 dump, row-major. Exact round trip.
void write_state_f64(const std::filesystem::path& path, const StateVector& state);
StateVector read_state_f64(const std::filesystem::path& path);

/// 8-bit binary PGM, values mapped linearly from [-1.2, 1.2].
void write_state_pgm(const std::filesystem::path& path, const StateVector& state);

/// Loads a state from .f64 (raw doubles) or .json (flat array) by extension.
StateVector load_state_file(const std::filesystem::path& path);

/// Writes a file atomically (temp file + rename).
void atomic_write(const std::filesystem::path& path, const std::string& contents);

/// Fixed 9-significant-digit float formatting used by all exports.
std::string format_float(double v);

}  // namespace ghisd

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ghisd/dynamics.hpp"
#include "ghisd/symmetry.hpp"
#include "ghisd/systems.hpp"

namespace ghisd {

/// True iff a equals b up to the allowed cyclic grid translations, within
/// tol in the weighted norm. Sign-flip is never applied (phi and -phi are
/// distinct nodes). The minimization scans all allowed shifts, which is
/// exactly the cross-correlation maximization.
bool is_equivalent(const StateVector& a, const StateVector& b, const SymmetrySpec& sym,
                   double tol, double weight);

/// Deterministic shift-aligned representative of a state's translation
/// orbit; identity when translations are not quotiented.
StateVector canonical_align(const StateVector& state, const SymmetrySpec& sym);

enum class NodeProvenance { kSeed, kParent, kDownward, kUpward };
std::string to_string(NodeProvenance p);

struct LandscapeNode {
  SaddleRecord record;  // record.x stored in canonical alignment
  NodeProvenance provenance = NodeProvenance::kSeed;
};

struct LandscapeEdge {
  std::string parent;
  std::string child;
  int direction = 0;  // 1-based unstable-direction index used for the search
  int sign = 1;       // +1 / -1 perturbation sign
};

struct SearchWarning {
  std::string context;  // e.g. "downward n0 m=1 dir=2 sign=-"
  std::string message;
};

/// Deduplicated stationary points (nodes) plus directed search-pathway
/// relations (edges). Nodes are keyed by label, assigned in insertion order.
class LandscapeGraph {
 public:
  LandscapeGraph() = default;
  LandscapeGraph(SystemSpec spec, SearchConfig cfg, SymmetrySpec sym)
      : system_spec_(spec), config_(cfg), symmetry_(sym) {}

  const std::vector<LandscapeNode>& nodes() const { return nodes_; }
  const std::vector<LandscapeEdge>& edges() const { return edges_; }
  const std::vector<SearchWarning>& warnings() const { return warnings_; }
  const SystemSpec& system_spec() const { return system_spec_; }
  const SearchConfig& config() const { return config_; }
  const SymmetrySpec& symmetry() const { return symmetry_; }

  bool empty() const { return nodes_.empty(); }
  std::size_t node_count() const { return nodes_.size(); }

  const LandscapeNode* find(const std::string& label) const;
  /// Label of the node equivalent to `state` under the graph symmetry, if any.
  std::optional<std::string> find_equivalent(const StateVector& state, double weight) const;

  /// Inserts a record (state canonicalized); returns the assigned label.
  std::string insert(SaddleRecord record, NodeProvenance provenance);
  /// Records a relation; duplicate (parent, child) pairs keep the first tag.
  void add_edge(const std::string& parent, const std::string& child, int direction, int sign);
  void add_warning(std::string context, std::string message);

  /// Node count per index value (index -> count).
  std::map<int, int> index_histogram() const;
  int diverged_runs() const { return diverged_runs_; }
  void note_diverged_run() { ++diverged_runs_; }

  /// Import path: append a node/edge exactly as stored (no relabel, no
  /// canonicalization, no dedup).
  void restore_node(LandscapeNode node) { nodes_.push_back(std::move(node)); }
  void restore_edge(LandscapeEdge edge) { edges_.push_back(std::move(edge)); }

 private:
  SystemSpec system_spec_;
  SearchConfig config_;
  SymmetrySpec symmetry_;
  std::vector<LandscapeNode> nodes_;
  std::vector<LandscapeEdge> edges_;
  std::vector<SearchWarning> warnings_;
  int diverged_runs_ = 0;
};

/// Execution policy for the search loops. Any thread count produces the
/// same graph as threads = 1; per-entry results are committed in
/// (direction, sign) order regardless of completion order.
struct ExecPolicy {
  int threads = 1;
};

/// Algorithm: downward search. Seeds a FIFO queue with the parent and its
/// unstable basis; each popped entry launches m-GHiSD from +/- eps along
/// every basis direction, verifies and deduplicates converged points, and
/// records parent->child relations. Non-convergent sub-searches become
/// warnings, never errors. Results merge into `graph`.
void downward_search(const VectorFieldSystem& system, const SaddleRecord& parent,
                     const SearchConfig& cfg, const SymmetrySpec& sym, LandscapeGraph& graph,
                     const ExecPolicy& exec = {});

/// Algorithm: upward search (LIFO stack), up to saddles of index K.
/// Discovers nodes only; no relations are recorded.
void upward_search(const VectorFieldSystem& system, const SaddleRecord& start, int max_index,
                   const SearchConfig& cfg, const SymmetrySpec& sym, LandscapeGraph& graph,
                   const ExecPolicy& exec = {});

}  // namespace ghisd

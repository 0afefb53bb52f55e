#pragma once

#include <string>
#include <vector>

#include "ghisd/landscape.hpp"

namespace ghisd {

/// Named initial guess for a landscape plan.
struct Seed {
  std::string name;
  StateVector state;
};

enum class DirectiveOp {
  kFindParent,  // run k-GHiSD from a seed (k = dimension reproduces the reversed flow)
  kDownward,
  kUpward,
};

std::string to_string(DirectiveOp op);

/// One step of a landscape plan. `from` may name a seed, an anchor assigned
/// by an earlier find_parent, or an existing node label.
struct PlanDirective {
  DirectiveOp op = DirectiveOp::kDownward;
  std::string seed;            // find_parent: which seed to start from
  std::string from;            // downward/upward: seed, anchor, or node label
  std::string as = "parent";   // find_parent: anchor name for the result
  int ghisd_k = 0;             // find_parent: search order k
  int probes = 0;              // index-verification probe count (0 = auto)
  int max_index = 0;           // upward: highest index K
};

/// Executes the directives in order, merging everything into one graph with
/// global deduplication. Deterministic given config and seeds.
LandscapeGraph build_landscape(const VectorFieldSystem& system, const SystemSpec& spec,
                               const std::vector<Seed>& seeds,
                               const std::vector<PlanDirective>& plan, const SearchConfig& cfg,
                               const SymmetrySpec& sym, const ExecPolicy& exec = {});

}  // namespace ghisd

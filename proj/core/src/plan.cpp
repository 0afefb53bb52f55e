#include "ghisd/plan.hpp"

#include <algorithm>

#include "ghisd/errors.hpp"

namespace ghisd {

std::string to_string(DirectiveOp op) {
  switch (op) {
    case DirectiveOp::kFindParent: return "find_parent";
    case DirectiveOp::kDownward: return "downward";
    case DirectiveOp::kUpward: return "upward";
  }
  return "unknown";
}

namespace {

const Seed* find_seed(const std::vector<Seed>& seeds, const std::string& name) {
  for (const auto& s : seeds)
    if (s.name == name) return &s;
  return nullptr;
}

int default_probes(const VectorFieldSystem& system, int requested) {
  if (requested > 0) return std::min(requested, system.dimension());
  return std::min(8, system.dimension());
}

// Verifies a seed state is stationary, measures its index, and inserts it.
std::string refine_seed_into_node(const VectorFieldSystem& system, const Seed& seed, int probes,
                                  const SearchConfig& cfg, LandscapeGraph& graph,
                                  const std::string& field) {
  if (seed.state.size() != system.dimension())
    throw ValidationError(field, "seed '" + seed.name + "' has dimension " +
                                     std::to_string(seed.state.size()) + ", system needs " +
                                     std::to_string(system.dimension()));
  StateVector state = seed.state;
  if (system.grid()) state.grid = system.grid();
  const double res = weighted_norm(system.eval_field(state), system.inner_weight());
  if (res > cfg.residual_tol)
    throw ValidationError(field, "seed '" + seed.name + "' is not stationary (residual " +
                                     std::to_string(res) + "); use find_parent first");

  IndexReport report = estimate_index(system, state, default_probes(system, probes), cfg);
  SaddleRecord rec;
  rec.x = std::move(state);
  rec.index = report.index;
  rec.unstable_basis = report.basis;
  rec.residual = res;
  rec.zero_count = report.zero_count;
  rec.label = "k" + std::to_string(report.index);
  return graph.insert(std::move(rec), NodeProvenance::kSeed);
}

}  // namespace

LandscapeGraph build_landscape(const VectorFieldSystem& system, const SystemSpec& spec,
                               const std::vector<Seed>& seeds,
                               const std::vector<PlanDirective>& plan, const SearchConfig& cfg,
                               const SymmetrySpec& sym, const ExecPolicy& exec) {
  cfg.validate();
  LandscapeGraph graph(spec, cfg, sym);
  std::vector<std::pair<std::string, std::string>> anchors;  // name -> node label

  auto anchor_label = [&](const std::string& name) -> const std::string* {
    for (const auto& [n, label] : anchors)
      if (n == name) return &label;
    return nullptr;
  };

  // `from` may name an anchor, an existing node label, or a (stationary) seed.
  auto resolve = [&](const std::string& from, int probes,
                     const std::string& field) -> std::string {
    if (const std::string* label = anchor_label(from)) return *label;
    if (graph.find(from)) return from;
    if (const Seed* seed = find_seed(seeds, from))
      return refine_seed_into_node(system, *seed, probes, cfg, graph, field);
    throw ValidationError(field, "unknown label or seed '" + from + "'");
  };

  for (std::size_t d = 0; d < plan.size(); ++d) {
    const PlanDirective& directive = plan[d];
    const std::string field = "plan[" + std::to_string(d) + "]";

    switch (directive.op) {
      case DirectiveOp::kFindParent: {
        const Seed* seed = find_seed(seeds, directive.seed);
        if (!seed) throw ValidationError(field + ".seed", "unknown seed '" + directive.seed + "'");
        const int k = directive.ghisd_k;
        if (k < 1 || k > system.dimension())
          throw ValidationError(field + ".k", "must be in [1, dimension]");
        StateVector x0 = seed->state;
        if (system.grid()) x0.grid = system.grid();

        PowerBasisResult probe = power_unstable_basis(system, x0, k, cfg);
        GhisdOutcome outcome = ghisd_run(system, x0, probe.frame, cfg);
        if (outcome.status != RunStatus::kConverged) {
          if (outcome.status == RunStatus::kDiverged) graph.note_diverged_run();
          graph.add_warning("find_parent " + directive.seed,
                            "did not converge (status " + to_string(outcome.status) + ")");
          break;
        }
        SaddleRecord rec = refine_saddle(system, outcome, directive.probes, cfg);
        std::string label;
        if (auto existing = graph.find_equivalent(rec.x, system.inner_weight())) {
          label = *existing;
        } else {
          label = graph.insert(std::move(rec), NodeProvenance::kParent);
        }
        anchors.emplace_back(directive.as.empty() ? "parent" : directive.as, label);
        break;
      }
      case DirectiveOp::kDownward: {
        const std::string label = resolve(directive.from, directive.probes, field + ".from");
        const LandscapeNode* node = graph.find(label);
        downward_search(system, node->record, cfg, sym, graph, exec);
        break;
      }
      case DirectiveOp::kUpward: {
        if (directive.max_index < 1)
          throw ValidationError(field + ".max_index", "must be >= 1");
        const std::string label = resolve(directive.from, directive.probes, field + ".from");
        const LandscapeNode* node = graph.find(label);
        upward_search(system, node->record, directive.max_index, cfg, sym, graph, exec);
        break;
      }
    }
  }
  return graph;
}

}  // namespace ghisd

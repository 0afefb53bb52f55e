#include "ghisd/landscape.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <future>
#include <numbers>
#include <sstream>

#include "ghisd/errors.hpp"

namespace ghisd {

namespace {

// Squared weighted distance between a and b shifted by (si, sj).
double shifted_dist_sq(const StateVector& a, const StateVector& b, int si, int sj,
                       double weight) {
  const int rows = a.grid->rows;
  const int cols = a.grid->cols;
  double acc = 0.0;
  for (int i = 0; i < rows; ++i) {
    int src_i = i - si;
    if (src_i < 0) src_i += rows;
    const Eigen::Index row_a = static_cast<Eigen::Index>(i) * cols;
    const Eigen::Index row_b = static_cast<Eigen::Index>(src_i) * cols;
    for (int j = 0; j < cols; ++j) {
      int src_j = j - sj;
      if (src_j < 0) src_j += cols;
      const double d = a.values[row_a + j] - b.values[row_b + src_j];
      acc += d * d;
    }
  }
  return weight * acc;
}

// Shift (si, sj) whose application canonically aligns the state: the one
// maximizing correlation against a fixed low-harmonic template, ties
// resolved to the lexicographically smallest shift.
std::pair<int, int> canonical_shift_of(const StateVector& state, const SymmetrySpec& sym) {
  if (sym.translations == TranslationSymmetry::kNone || !state.grid) return {0, 0};
  const int rows = state.grid->rows;
  const int cols = state.grid->cols;
  const int row_shifts = (sym.translations == TranslationSymmetry::kXY) ? rows : 1;

  auto tmpl = [&](int i, int j) {
    return std::cos(2.0 * std::numbers::pi * j / cols) +
           2.0 * std::cos(2.0 * std::numbers::pi * i / rows) +
           0.5 * std::sin(4.0 * std::numbers::pi * j / cols);
  };
  double best = -std::numeric_limits<double>::infinity();
  int best_si = 0, best_sj = 0;
  for (int si = 0; si < row_shifts; ++si) {
    for (int sj = 0; sj < cols; ++sj) {
      double corr = 0.0;
      for (int i = 0; i < rows; ++i) {
        int src_i = i - si;
        if (src_i < 0) src_i += rows;
        for (int j = 0; j < cols; ++j) {
          int src_j = j - sj;
          if (src_j < 0) src_j += cols;
          corr += state.values[static_cast<Eigen::Index>(src_i) * cols + src_j] * tmpl(i, j);
        }
      }
      if (corr > best) {
        best = corr;
        best_si = si;
        best_sj = sj;
      }
    }
  }
  return {best_si, best_sj};
}

}  // namespace

bool is_equivalent(const StateVector& a, const StateVector& b, const SymmetrySpec& sym,
                   double tol, double weight) {
  if (a.size() != b.size()) throw ContractError("is_equivalent: dimension mismatch");
  if (sym.translations == TranslationSymmetry::kNone || !a.grid || !b.grid)
    return std::sqrt(weight) * (a.values - b.values).norm() <= tol;

  // Norms are shift-invariant: a cheap reject before the shift scan.
  const double na = std::sqrt(weight) * a.values.norm();
  const double nb = std::sqrt(weight) * b.values.norm();
  if (std::abs(na - nb) > tol) return false;

  const int rows = a.grid->rows;
  const int cols = a.grid->cols;
  const int row_shifts = (sym.translations == TranslationSymmetry::kXY) ? rows : 1;
  const double tol_sq = tol * tol;
  // Minimizing distance over shifts is the same scan as maximizing the
  // cross-correlation, since the norms are fixed.
  for (int si = 0; si < row_shifts; ++si)
    for (int sj = 0; sj < cols; ++sj)
      if (shifted_dist_sq(a, b, si, sj, weight) <= tol_sq) return true;
  return false;
}

StateVector canonical_align(const StateVector& state, const SymmetrySpec& sym) {
  const auto [si, sj] = canonical_shift_of(state, sym);
  if (si == 0 && sj == 0) return state;
  return cyclic_shift(state, si, sj);
}

std::string to_string(NodeProvenance p) {
  switch (p) {
    case NodeProvenance::kSeed: return "seed";
    case NodeProvenance::kParent: return "parent";
    case NodeProvenance::kDownward: return "downward";
    case NodeProvenance::kUpward: return "upward";
  }
  return "unknown";
}

const LandscapeNode* LandscapeGraph::find(const std::string& label) const {
  for (const auto& n : nodes_)
    if (n.record.label == label) return &n;
  return nullptr;
}

std::optional<std::string> LandscapeGraph::find_equivalent(const StateVector& state,
                                                           double weight) const {
  for (const auto& n : nodes_)
    if (is_equivalent(state, n.record.x, symmetry_, config_.x_tol, weight))
      return n.record.label;
  return std::nullopt;
}

std::string LandscapeGraph::insert(SaddleRecord record, NodeProvenance provenance) {
  // Canonical alignment; the unstable basis is shifted identically so it
  // stays the basis at the stored state.
  const auto [si, sj] = canonical_shift_of(record.x, symmetry_);
  if (si != 0 || sj != 0) {
    record.x = cyclic_shift(record.x, si, sj);
    for (auto& v : record.unstable_basis.directions) v = cyclic_shift(v, si, sj);
  }
  record.label = "n" + std::to_string(nodes_.size());
  nodes_.push_back(LandscapeNode{std::move(record), provenance});
  return nodes_.back().record.label;
}

void LandscapeGraph::add_edge(const std::string& parent, const std::string& child, int direction,
                              int sign) {
  for (const auto& e : edges_)
    if (e.parent == parent && e.child == child) return;  // keep first tag
  edges_.push_back(LandscapeEdge{parent, child, direction, sign});
}

void LandscapeGraph::add_warning(std::string context, std::string message) {
  warnings_.push_back(SearchWarning{std::move(context), std::move(message)});
}

std::map<int, int> LandscapeGraph::index_histogram() const {
  std::map<int, int> hist;
  for (const auto& n : nodes_) ++hist[n.record.index];
  return hist;
}

namespace {

std::vector<GhisdOutcome> run_jobs(std::vector<std::function<GhisdOutcome()>> jobs,
                                   const ExecPolicy& exec) {
  std::vector<GhisdOutcome> results(jobs.size());
  if (exec.threads <= 1 || jobs.size() <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = jobs[i]();
    return results;
  }
  std::vector<std::future<GhisdOutcome>> futures;
  futures.reserve(jobs.size());
  for (auto& job : jobs) futures.push_back(std::async(std::launch::async, std::move(job)));
  for (std::size_t i = 0; i < futures.size(); ++i) results[i] = futures[i].get();
  return results;
}

// Initial directions for an m-GHiSD launch along basis direction i
// (1-based): the literal rule {v_j : j = 1..m+1, j != min(i, m+1)}, or the
// prose variant {v_1..v_m}.
std::vector<StateVector> downward_initial_directions(const Frame& basis, int m, int i,
                                                     bool prose_variant) {
  std::vector<StateVector> dirs;
  dirs.reserve(static_cast<std::size_t>(m));
  if (prose_variant) {
    for (int j = 1; j <= m; ++j) dirs.push_back(basis[j - 1]);
    return dirs;
  }
  const int excluded = std::min(i, m + 1);
  for (int j = 1; j <= m + 1; ++j)
    if (j != excluded) dirs.push_back(basis[j - 1]);
  return dirs;
}

struct DownwardEntry {
  std::string label;
  StateVector x;
  int m = 0;
  Frame basis;
};

std::string run_context(const char* algo, const std::string& label, int m, int direction,
                        int sign) {
  std::ostringstream os;
  os << algo << " " << label << " m=" << m << " dir=" << direction
     << " sign=" << (sign > 0 ? "+" : "-");
  return os.str();
}

}  // namespace

void downward_search(const VectorFieldSystem& system, const SaddleRecord& parent,
                     const SearchConfig& cfg, const SymmetrySpec& sym, LandscapeGraph& graph,
                     const ExecPolicy& exec) {
  const double w = system.inner_weight();
  auto find_equiv = [&](const StateVector& state) -> std::optional<std::string> {
    for (const auto& n : graph.nodes())
      if (is_equivalent(state, n.record.x, sym, cfg.x_tol, w)) return n.record.label;
    return std::nullopt;
  };

  std::string parent_label;
  if (auto existing = find_equiv(parent.x)) {
    parent_label = *existing;
  } else {
    parent_label = graph.insert(parent, NodeProvenance::kParent);
  }

  std::deque<DownwardEntry> queue;
  {
    const LandscapeNode* node = graph.find(parent_label);
    if (node->record.index >= 1)
      queue.push_back(DownwardEntry{parent_label, node->record.x, node->record.index - 1,
                                    node->record.unstable_basis});
  }

  while (!queue.empty()) {
    DownwardEntry entry = queue.front();
    queue.pop_front();

    if (entry.m >= 1)
      queue.push_back(DownwardEntry{entry.label, entry.x, entry.m - 1, entry.basis});

    const int k = entry.basis.count();
    struct JobInfo {
      int direction;
      int sign;
    };
    std::vector<JobInfo> info;
    std::vector<std::function<GhisdOutcome()>> jobs;
    for (int i = 1; i <= k; ++i) {
      for (int sign : {+1, -1}) {
        std::vector<StateVector> dirs = downward_initial_directions(
            entry.basis, entry.m, i, cfg.downward_prose_directions);
        StateVector x0 = entry.x;
        x0.values += (sign * cfg.eps_perturb) * entry.basis[i - 1].values;
        Frame frame0 = dirs.empty() ? Frame{} : Frame(std::move(dirs));
        info.push_back(JobInfo{i, sign});
        jobs.push_back([&system, x0 = std::move(x0), frame0 = std::move(frame0), &cfg]() {
          return ghisd_run(system, x0, frame0, cfg);
        });
      }
    }

    std::vector<GhisdOutcome> outcomes = run_jobs(std::move(jobs), exec);

    const int parent_index = graph.find(entry.label)->record.index;
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
      const GhisdOutcome& outcome = outcomes[r];
      const std::string ctx =
          run_context("downward", entry.label, entry.m, info[r].direction, info[r].sign);
      if (outcome.status != RunStatus::kConverged) {
        if (outcome.status == RunStatus::kDiverged) graph.note_diverged_run();
        graph.add_warning(ctx, "search ended with status " + to_string(outcome.status));
        continue;
      }

      std::string child_label;
      if (auto existing = find_equiv(outcome.final_x)) {
        child_label = *existing;
      } else {
        SaddleRecord rec;
        try {
          rec = refine_saddle(system, outcome, 0, cfg);
        } catch (const PreconditionError& e) {
          graph.add_warning(ctx, std::string("index verification failed: ") + e.what());
          continue;
        }
        if (rec.index != entry.m)
          graph.add_warning(ctx, "index mismatch: searched m=" + std::to_string(entry.m) +
                                     ", measured " + std::to_string(rec.index));
        child_label = graph.insert(std::move(rec), NodeProvenance::kDownward);
        const LandscapeNode* child = graph.find(child_label);
        if (child->record.index >= 1)
          queue.push_back(DownwardEntry{child_label, child->record.x, child->record.index - 1,
                                        child->record.unstable_basis});
      }

      const int child_index = graph.find(child_label)->record.index;
      if (child_label != entry.label && child_index < parent_index) {
        graph.add_edge(entry.label, child_label, info[r].direction, info[r].sign);
      } else {
        graph.add_warning(ctx, "relation to " + child_label +
                                   " dropped: child index " + std::to_string(child_index) +
                                   " is not below parent index " + std::to_string(parent_index));
      }
    }
  }
}

void upward_search(const VectorFieldSystem& system, const SaddleRecord& start, int max_index,
                   const SearchConfig& cfg, const SymmetrySpec& sym, LandscapeGraph& graph,
                   const ExecPolicy& exec) {
  const double w = system.inner_weight();
  const int K = std::min<int>(max_index, system.dimension());
  auto find_equiv = [&](const StateVector& state) -> std::optional<std::string> {
    for (const auto& n : graph.nodes())
      if (is_equivalent(state, n.record.x, sym, cfg.x_tol, w)) return n.record.label;
    return std::nullopt;
  };

  std::string start_label;
  if (auto existing = find_equiv(start.x)) {
    start_label = *existing;
  } else {
    start_label = graph.insert(start, NodeProvenance::kSeed);
  }
  const LandscapeNode* start_node = graph.find(start_label);
  if (start_node->record.index >= K) return;  // no room upward

  struct UpwardEntry {
    std::string label;
    StateVector x;
    int m = 0;
    Frame dirs;  // K probe directions at x
  };

  std::vector<UpwardEntry> stack;
  {
    PowerBasisResult probe = power_unstable_basis(system, start_node->record.x, K, cfg);
    if (!probe.converged)
      graph.add_warning("upward " + start_label, "probe directions not fully converged");
    stack.push_back(UpwardEntry{start_label, start_node->record.x,
                                start_node->record.index + 1, std::move(probe.frame)});
  }

  while (!stack.empty()) {
    UpwardEntry entry = std::move(stack.back());
    stack.pop_back();

    if (entry.m < K)
      stack.push_back(UpwardEntry{entry.label, entry.x, entry.m + 1, entry.dirs});

    // m-GHiSD from x +/- eps v_m with the first m directions (v_m included).
    std::vector<StateVector> dirs(entry.dirs.directions.begin(),
                                  entry.dirs.directions.begin() + entry.m);
    std::vector<std::function<GhisdOutcome()>> jobs;
    std::vector<int> signs = {+1, -1};
    for (int sign : signs) {
      StateVector x0 = entry.x;
      x0.values += (sign * cfg.eps_perturb) * entry.dirs[entry.m - 1].values;
      Frame frame0(dirs);
      jobs.push_back([&system, x0 = std::move(x0), frame0 = std::move(frame0), &cfg]() {
        return ghisd_run(system, x0, frame0, cfg);
      });
    }
    std::vector<GhisdOutcome> outcomes = run_jobs(std::move(jobs), exec);

    for (std::size_t r = 0; r < outcomes.size(); ++r) {
      const GhisdOutcome& outcome = outcomes[r];
      const std::string ctx = run_context("upward", entry.label, entry.m, entry.m, signs[r]);
      if (outcome.status != RunStatus::kConverged) {
        if (outcome.status == RunStatus::kDiverged) graph.note_diverged_run();
        graph.add_warning(ctx, "search ended with status " + to_string(outcome.status));
        continue;
      }
      if (find_equiv(outcome.final_x)) continue;  // known node

      SaddleRecord rec;
      try {
        rec = refine_saddle(system, outcome, 0, cfg);
      } catch (const PreconditionError& e) {
        graph.add_warning(ctx, std::string("index verification failed: ") + e.what());
        continue;
      }
      if (rec.index != entry.m)
        graph.add_warning(ctx, "index mismatch: searched m=" + std::to_string(entry.m) +
                                   ", measured " + std::to_string(rec.index));
      const std::string label = graph.insert(std::move(rec), NodeProvenance::kUpward);
      if (entry.m < K) {
        const LandscapeNode* node = graph.find(label);
        PowerBasisResult fresh = power_unstable_basis(system, node->record.x, K, cfg);
        if (!fresh.converged)
          graph.add_warning("upward " + label, "probe directions not fully converged");
        stack.push_back(
            UpwardEntry{label, node->record.x, entry.m + 1, std::move(fresh.frame)});
      }
    }
  }
}

}  // namespace ghisd

#include "ghisd/dynamics.hpp"

#include <cmath>
#include <vector>

#include "ghisd/errors.hpp"

namespace ghisd {

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kConverged: return "converged";
    case RunStatus::kMaxIters: return "max-iters";
    case RunStatus::kDiverged: return "diverged";
    case RunStatus::kDegenerateFrame: return "degenerate-frame";
  }
  return "unknown";
}

namespace {

// One scheme step given F(x) already evaluated. Mutates x and frame.
void step_with_field(const VectorFieldSystem& system, StateVector& x, Frame& frame,
                     const SearchConfig& cfg, const StateVector& field, StateVector& scratch) {
  const double w = system.inner_weight();
  const int k = frame.count();

  if (k == 0) {
    // Plain explicit Euler; scalar loop keeps this bitwise comparable to an
    // independently coded integrator.
    const double* f = field.values.data();
    double* xv = x.values.data();
    const Eigen::Index n = x.size();
    for (Eigen::Index i = 0; i < n; ++i) xv[i] = xv[i] + cfg.alpha * f[i];
    return;
  }

  StateVector previous_x;
  if (!cfg.dimer_at_updated_x) previous_x = x;

  // Position: x + alpha * (F - 2 sum_j <F, v_j> v_j), accumulated in
  // direction order.
  scratch.values = field.values;
  for (int j = 0; j < k; ++j) {
    const double coeff = 2.0 * weighted_dot(field, frame[j], w);
    scratch.values -= coeff * frame[j].values;
  }
  x.values += cfg.alpha * scratch.values;

  // Directions: dimer step at the updated position x^(m+1) (the printed
  // scheme), or at x^(m) with the variant toggle; then re-orthonormalize.
  const StateVector& base = cfg.dimer_at_updated_x ? x : previous_x;
  const double l = effective_dimer_length(system, base, cfg);
  std::vector<StateVector> updated;
  updated.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    StateVector jv = dimer_derivative(system, base, frame[i], l);
    jv.values = frame[i].values + cfg.beta * jv.values;
    updated.push_back(std::move(jv));
  }
  frame = orthonormalize(updated, w);
}

}  // namespace

void ghisd_step(const VectorFieldSystem& system, StateVector& x, Frame& frame,
                const SearchConfig& cfg) {
  StateVector field = system.eval_field(x);
  StateVector scratch = system.make_state();
  step_with_field(system, x, frame, cfg, field, scratch);
}

GhisdOutcome ghisd_run(const VectorFieldSystem& system, const StateVector& x0,
                       const Frame& frame0, const SearchConfig& cfg) {
  GhisdOutcome out;
  out.final_x = x0;
  out.final_frame = frame0;
  const double w = system.inner_weight();

  StateVector field = system.make_state();
  StateVector scratch = system.make_state();

  try {
    for (std::int64_t it = 0;; ++it) {
      system.eval_field_into(out.final_x, field);
      out.residual = weighted_norm(field, w);
      out.iterations = it;

      if (!all_finite(out.final_x) || !std::isfinite(out.residual) ||
          weighted_norm(out.final_x, w) > cfg.divergence_bound) {
        out.status = RunStatus::kDiverged;
        return out;
      }
      if (out.residual <= cfg.residual_tol) {
        out.status = RunStatus::kConverged;
        return out;
      }
      if (it >= cfg.max_iters) {
        out.status = RunStatus::kMaxIters;
        return out;
      }

      step_with_field(system, out.final_x, out.final_frame, cfg, field, scratch);
    }
  } catch (const DegenerateFrameError&) {
    out.status = RunStatus::kDegenerateFrame;
    return out;
  }
}

SaddleRecord refine_saddle(const VectorFieldSystem& system, const GhisdOutcome& outcome,
                           int probes, const SearchConfig& cfg) {
  if (outcome.status != RunStatus::kConverged)
    throw PreconditionError("refine_saddle: outcome did not converge (status " +
                            to_string(outcome.status) + ")");
  const int searched_k = outcome.final_frame.count();
  int k = probes > 0 ? std::max(probes, searched_k + 2) : searched_k + 2;
  k = std::min<int>(std::max(k, 1), system.dimension());

  IndexReport report = estimate_index(system, outcome.final_x, k, cfg);

  SaddleRecord rec;
  rec.x = outcome.final_x;
  rec.index = report.index;
  rec.unstable_basis = report.basis;
  rec.residual = outcome.residual;
  rec.zero_count = report.zero_count;
  rec.label = "k" + std::to_string(report.index);
  if (report.index != searched_k) rec.label += "~m" + std::to_string(searched_k);
  return rec;
}

}  // namespace ghisd

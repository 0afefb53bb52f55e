#pragma once

#include <string>

#include "ghisd/frame.hpp"

namespace ghisd {

enum class RunStatus {
  kConverged,
  kMaxIters,
  kDiverged,
  kDegenerateFrame,
};

std::string to_string(RunStatus s);

struct GhisdOutcome {
  RunStatus status = RunStatus::kMaxIters;
  StateVector final_x;
  Frame final_frame;
  double residual = 0.0;
  std::int64_t iterations = 0;
};

/// A converged stationary point with its measured index and unstable basis.
struct SaddleRecord {
  StateVector x;
  int index = 0;
  Frame unstable_basis;  // k = index
  double residual = 0.0;
  int zero_count = 0;
  std::string label;
};

/// One explicit-Euler step of k-GHiSD: the position moves along F reflected
/// through the frame span, then each direction takes a dimer step and the
/// frame is re-orthonormalized. With k = 0 this is plain explicit Euler.
void ghisd_step(const VectorFieldSystem& system, StateVector& x, Frame& frame,
                const SearchConfig& cfg);

/// Iterates ghisd_step until |F(x)| <= residual_tol, max_iters is hit, or
/// the trajectory leaves the divergence bound / turns non-finite. The caller
/// is responsible for index verification of a converged point.
GhisdOutcome ghisd_run(const VectorFieldSystem& system, const StateVector& x0,
                       const Frame& frame0, const SearchConfig& cfg);

/// Packages a converged outcome as a SaddleRecord: measures the index at
/// final_x with `probes` directions (clamped to the dimension; pass 0 for
/// the default frame.k + 2) and records any search/measured index mismatch
/// in the label. Throws PreconditionError unless outcome converged.
SaddleRecord refine_saddle(const VectorFieldSystem& system, const GhisdOutcome& outcome,
                           int probes, const SearchConfig& cfg);

}  // namespace ghisd

#pragma once

#include <vector>

#include "ghisd/config.hpp"
#include "ghisd/state.hpp"
#include "ghisd/systems.hpp"

namespace ghisd {

/// An ordered set of k mutually orthonormal directions (under the system's
/// weighted inner product) approximating a basis of the unstable subspace.
struct Frame {
  std::vector<StateVector> directions;

  Frame() = default;
  explicit Frame(std::vector<StateVector> dirs) : directions(std::move(dirs)) {}

  int count() const { return static_cast<int>(directions.size()); }
  const StateVector& operator[](int i) const { return directions[i]; }
  StateVector& operator[](int i) { return directions[i]; }

  /// Largest deviation |<v_i, v_j> - delta_ij| under the weighted product.
  double orthonormality_defect(double weight) const;
};

/// Modified Gram-Schmidt with one reorthogonalization pass. Span is
/// preserved for full-rank input and the first output direction stays
/// parallel to the first input. Throws DegenerateFrameError naming the
/// first column whose post-projection norm drops below 1e-12.
Frame orthonormalize(const std::vector<StateVector>& raw, double weight);

/// Central-difference (dimer) approximation of the Jacobian-vector product:
/// (F(x + l v) - F(x - l v)) / (2 l). Exact for fields affine in x.
StateVector dimer_derivative(const VectorFieldSystem& system, const StateVector& x,
                             const StateVector& v, double half_length);

/// Effective dimer half-length at x: base scaled by max(1, |x|_w).
double effective_dimer_length(const VectorFieldSystem& system, const StateVector& x,
                              const SearchConfig& cfg);

struct PowerBasisResult {
  Frame frame;
  bool converged = false;
  std::int64_t iterations = 0;
};

/// Power iteration of I + beta*J(x) with Gram-Schmidt renormalization:
/// finds k directions spanning the dominant (most unstable) subspace.
/// Stops when the largest principal angle between successive spans falls
/// below cfg.subspace_tol or cfg.max_eigen_iters is reached.
PowerBasisResult power_unstable_basis(const VectorFieldSystem& system, const StateVector& x,
                                      int k, const SearchConfig& cfg);

/// Index measurement at a stationary point.
struct IndexReport {
  int index = 0;       // eigenvalue real parts > zero_tol among K probes
  int zero_count = 0;  // |Re| <= zero_tol
  std::vector<double> rayleigh;  // diagonal of V^T J V, sorted descending
  Frame basis;                   // spans the detected unstable subspace (k = index)
  bool possibly_truncated = false;  // all K probed real parts were positive
  bool power_converged = true;
};

/// Estimates the index at stationary x from K probe directions: runs
/// power_unstable_basis, projects J onto the span, and counts eigenvalue
/// real parts of the small projected matrix. K should exceed the expected
/// index so the smallest probed value is negative. When require_stationary
/// (the default) a residual above cfg.residual_tol raises PreconditionError.
IndexReport estimate_index(const VectorFieldSystem& system, const StateVector& x, int probes,
                           const SearchConfig& cfg, bool require_stationary = true);

}  // namespace ghisd

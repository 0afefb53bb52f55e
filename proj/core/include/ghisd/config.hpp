#pragma once

#include <cstdint>

namespace ghisd {

/// All solver and search hyperparameters. Defaults suit the small test
/// systems; make_default_config() adapts them to a SystemSpec.
struct SearchConfig {
  double alpha = 1e-2;            // position step size
  double beta = 1e-2;             // direction step size
  double dimer_l = 1e-4;          // dimer half-length base; scaled by max(1, |x|)
  double eps_perturb = 1e-2;      // saddle-escape perturbation
  double residual_tol = 1e-6;     // convergence threshold on |F(x)| (weighted norm)
  double x_tol = 1e-4;            // deduplication distance (weighted norm)
  double zero_tol = 1e-4;         // eigenvalue zero threshold
  double subspace_tol = 1e-8;     // power-iteration span tolerance (principal angle)
  std::int64_t max_iters = 100000;
  std::int64_t max_eigen_iters = 100000;
  double divergence_bound = 1e3;  // |x| cap

  // Direction update evaluates the dimer at the just-updated position
  // x^(m+1); set false for the x^(m) variant.
  bool dimer_at_updated_x = true;
  // Downward-search initial directions: false = the line-7 rule
  // {v_j : j = 1..m+1, j != min(i, m+1)}, true = the prose variant
  // (always drop v_{m+1} and perturb along v_i).
  bool downward_prose_directions = false;

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

}  // namespace ghisd

#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>

namespace ghisd {

/// Uniform periodic grid on the unit square, row-major storage.
/// Index (i, j): i is the row (y = i*spacing), j is the column (x = j*spacing).
struct GridMeta {
  int rows = 0;
  int cols = 0;
  double spacing = 0.0;  // h = 1/rows for the unit square

  bool operator==(const GridMeta&) const = default;
};

/// A point in phase space: flat coordinates plus optional grid metadata
/// for field-valued states.
struct StateVector {
  Eigen::VectorXd values;
  std::optional<GridMeta> grid;

  StateVector() = default;
  explicit StateVector(Eigen::VectorXd v) : values(std::move(v)) {}
  StateVector(Eigen::VectorXd v, GridMeta g) : values(std::move(v)), grid(g) {}

  Eigen::Index size() const { return values.size(); }
  double operator[](Eigen::Index i) const { return values[i]; }
  double& operator[](Eigen::Index i) { return values[i]; }

  /// Value at grid cell (i, j); requires grid metadata.
  double at(int i, int j) const { return values[static_cast<Eigen::Index>(i) * grid->cols + j]; }
  double& at(int i, int j) { return values[static_cast<Eigen::Index>(i) * grid->cols + j]; }
};

/// Mesh-weighted inner product: w * sum(u_i v_i). w = 1 for finite-dimensional
/// systems, h^2 for grid systems (discrete L2).
inline double weighted_dot(const StateVector& a, const StateVector& b, double weight) {
  return weight * a.values.dot(b.values);
}

inline double weighted_norm(const StateVector& a, double weight) {
  return std::sqrt(weight) * a.values.norm();
}

inline bool all_finite(const StateVector& a) { return a.values.allFinite(); }

/// Cyclic grid shift: cell (i, j) of the result reads cell (i - si, j - sj)
/// of the input (so the pattern moves by (si, sj)).
StateVector cyclic_shift(const StateVector& a, int row_shift, int col_shift);

}  // namespace ghisd

#pragma once

#include <memory>
#include <string>

#include "ghisd/config.hpp"
#include "ghisd/state.hpp"
#include "ghisd/symmetry.hpp"

namespace ghisd {

/// Which benchmark system to build.
enum class SystemKind {
  kQuartic2d,          // E(x,y) = (x^2-1)^2 + (y^2-1)^2, F = -grad E
  kToy3d,              // 3D linear part + Lorentzian terms, non-gradient
  kAllenCahn,          // F = kappa*Lap(phi) + phi - phi^3, periodic grid
  kShearedPhaseField,  // Allen-Cahn plus gamma*sin(2*pi*y)*dphi/dx
};

std::string to_string(SystemKind kind);
SystemKind system_kind_from_string(const std::string& name);

/// Parameters for make_system. kappa/gamma/grid_n are ignored by the
/// finite-dimensional kinds. reversed wraps the field as x -> -F(x),
/// used to find sources by running the inverse dynamics.
struct SystemSpec {
  SystemKind kind = SystemKind::kQuartic2d;
  double kappa = 0.02;  // gradient-energy coefficient, > 0
  double gamma = 0.0;   // shear rate, >= 0
  int grid_n = 64;      // grid points per side, power of two, >= 8
  bool reversed = false;

  bool is_grid_kind() const {
    return kind == SystemKind::kAllenCahn || kind == SystemKind::kShearedPhaseField;
  }
  void validate() const;  // throws ValidationError naming the field
};

/// An autonomous vector field xdot = F(x) with an associated inner product
/// and declared symmetries. Immutable after construction; eval methods are
/// reentrant and safe to call concurrently.
class VectorFieldSystem {
 public:
  virtual ~VectorFieldSystem() = default;

  int dimension() const { return dimension_; }
  double inner_weight() const { return weight_; }
  const std::optional<GridMeta>& grid() const { return grid_; }
  const SymmetrySpec& symmetry() const { return symmetry_; }
  virtual bool has_energy() const { return false; }

  StateVector eval_field(const StateVector& x) const;
  void eval_field_into(const StateVector& x, StateVector& out) const;

  /// Scalar energy for gradient systems; throws UnsupportedOperation otherwise.
  double eval_energy(const StateVector& x) const;

  /// Zero state with the system's shape (grid metadata attached when present).
  StateVector make_state() const;
  /// State with every coordinate equal to c.
  StateVector make_constant_state(double c) const;

 protected:
  VectorFieldSystem(int dimension, double weight, SymmetrySpec symmetry,
                    std::optional<GridMeta> grid = std::nullopt)
      : dimension_(dimension), weight_(weight), symmetry_(symmetry), grid_(grid) {}

  virtual void do_eval(const Eigen::VectorXd& x, Eigen::VectorXd& out) const = 0;
  virtual double do_energy(const Eigen::VectorXd& x) const;

 private:
  int dimension_;
  double weight_;
  SymmetrySpec symmetry_;
  std::optional<GridMeta> grid_;
};

using SystemPtr = std::shared_ptr<const VectorFieldSystem>;

/// Builds one of the benchmark systems (optionally sign-reversed).
SystemPtr make_system(const SystemSpec& spec);

/// Wraps an existing system as x -> -F(x). Energy is not forwarded.
SystemPtr make_reversed(SystemPtr inner);

/// 5-point periodic Laplacian scaled by 1/h^2. Requires grid metadata.
StateVector laplacian_periodic(const StateVector& field);

/// Solver defaults adapted to the system: explicit-Euler diffusion stability
/// for the grid kinds, plain toy defaults otherwise.
SearchConfig make_default_config(const SystemSpec& spec);

}  // namespace ghisd

#include "ghisd/systems.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "ghisd/errors.hpp"

namespace ghisd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::kQuartic2d: return "quartic2d";
    case SystemKind::kToy3d: return "toy3d";
    case SystemKind::kAllenCahn: return "allen_cahn";
    case SystemKind::kShearedPhaseField: return "sheared_phase_field";
  }
  return "unknown";
}

SystemKind system_kind_from_string(const std::string& name) {
  if (name == "quartic2d") return SystemKind::kQuartic2d;
  if (name == "toy3d") return SystemKind::kToy3d;
  if (name == "allen_cahn" || name == "allen-cahn") return SystemKind::kAllenCahn;
  if (name == "sheared_phase_field" || name == "sheared-phase-field")
    return SystemKind::kShearedPhaseField;
  throw ValidationError("system.kind", "unknown system kind '" + name + "'");
}

void SystemSpec::validate() const {
  if (is_grid_kind()) {
    if (!(kappa > 0.0)) throw ValidationError("system.kappa", "must be > 0");
    if (grid_n < 8) throw ValidationError("system.grid_n", "must be >= 8");
    if (!is_power_of_two(grid_n)) throw ValidationError("system.grid_n", "must be a power of two");
  }
  if (kind == SystemKind::kShearedPhaseField && gamma < 0.0)
    throw ValidationError("system.gamma", "must be >= 0");
}

void SearchConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ValidationError(std::string("search.") + name, "must be > 0");
  };
  positive(alpha, "alpha");
  positive(beta, "beta");
  positive(dimer_l, "dimer_l");
  positive(eps_perturb, "eps_perturb");
  positive(residual_tol, "residual_tol");
  positive(x_tol, "x_tol");
  positive(zero_tol, "zero_tol");
  positive(subspace_tol, "subspace_tol");
  positive(divergence_bound, "divergence_bound");
  if (max_iters <= 0) throw ValidationError("search.max_iters", "must be > 0");
  if (max_eigen_iters <= 0) throw ValidationError("search.max_eigen_iters", "must be > 0");
  if (!(residual_tol < divergence_bound))
    throw ValidationError("search.residual_tol", "must be < divergence_bound");
}

StateVector VectorFieldSystem::eval_field(const StateVector& x) const {
  StateVector out;
  eval_field_into(x, out);
  return out;
}

void VectorFieldSystem::eval_field_into(const StateVector& x, StateVector& out) const {
  if (x.size() != dimension_)
    throw ContractError("eval_field: state dimension " + std::to_string(x.size()) +
                        " != system dimension " + std::to_string(dimension_));
  out.values.resize(dimension_);
  out.grid = grid_;
  do_eval(x.values, out.values);
}

double VectorFieldSystem::eval_energy(const StateVector& x) const {
  if (!has_energy())
    throw UnsupportedOperation("eval_energy: system has no energy functional");
  if (x.size() != dimension_)
    throw ContractError("eval_energy: state dimension mismatch");
  return do_energy(x.values);
}

double VectorFieldSystem::do_energy(const Eigen::VectorXd&) const {
  throw UnsupportedOperation("eval_energy: not implemented");
}

StateVector VectorFieldSystem::make_state() const {
  StateVector s(Eigen::VectorXd::Zero(dimension_));
  s.grid = grid_;
  return s;
}

StateVector VectorFieldSystem::make_constant_state(double c) const {
  StateVector s(Eigen::VectorXd::Constant(dimension_, c));
  s.grid = grid_;
  return s;
}

namespace {

class Quartic2d final : public VectorFieldSystem {
 public:
  Quartic2d() : VectorFieldSystem(2, 1.0, SymmetrySpec{}) {}

  bool has_energy() const override { return true; }

 protected:
  void do_eval(const Eigen::VectorXd& x, Eigen::VectorXd& out) const override {
    out[0] = -4.0 * x[0] * (x[0] * x[0] - 1.0);
    out[1] = -4.0 * x[1] * (x[1] * x[1] - 1.0);
  }

  double do_energy(const Eigen::VectorXd& x) const override {
    const double a = x[0] * x[0] - 1.0;
    const double b = x[1] * x[1] - 1.0;
    return a * a + b * b;
  }
};

class Toy3d final : public VectorFieldSystem {
 public:
  Toy3d() : VectorFieldSystem(3, 1.0, SymmetrySpec{}) {}

 protected:
  void do_eval(const Eigen::VectorXd& x, Eigen::VectorXd& out) const override {
    // Linear part -A x with A rows (0.6, 0.1, 0), (-0.1, 0.6, -0.05),
    // (0, -0.1, 0.6), plus Lorentzian wells 5/(1 + (x_i - 5)^2).
    out[0] = -(0.6 * x[0] + 0.1 * x[1]) + lorentz(x[0]);
    out[1] = -(-0.1 * x[0] + 0.6 * x[1] - 0.05 * x[2]) + lorentz(x[1]);
    out[2] = -(-0.1 * x[1] + 0.6 * x[2]) + lorentz(x[2]);
  }

 private:
  static double lorentz(double v) {
    const double d = v - 5.0;
    return 5.0 / (1.0 + d * d);
  }
};

class PhaseFieldBase : public VectorFieldSystem {
 public:
  PhaseFieldBase(double kappa, int n, SymmetrySpec sym)
      : VectorFieldSystem(n * n, 1.0 / (static_cast<double>(n) * n), sym,
                          GridMeta{n, n, 1.0 / n}),
        kappa_(kappa),
        n_(n),
        h_(1.0 / n) {}

  bool has_energy() const override { return false; }

 protected:
  // kappa*Lap(phi) + phi - phi^3 written into out; shear hooks add to it.
  void eval_allen_cahn(const Eigen::VectorXd& p, Eigen::VectorXd& out) const {
    const int n = n_;
    const double inv_h2 = 1.0 / (h_ * h_);
    for (int i = 0; i < n; ++i) {
      const int up = (i + 1 == n) ? 0 : i + 1;
      const int dn = (i == 0) ? n - 1 : i - 1;
      const Eigen::Index row = static_cast<Eigen::Index>(i) * n;
      const Eigen::Index row_up = static_cast<Eigen::Index>(up) * n;
      const Eigen::Index row_dn = static_cast<Eigen::Index>(dn) * n;
      for (int j = 0; j < n; ++j) {
        const int rt = (j + 1 == n) ? 0 : j + 1;
        const int lf = (j == 0) ? n - 1 : j - 1;
        const double c = p[row + j];
        const double lap =
            (p[row_up + j] + p[row_dn + j] + p[row + rt] + p[row + lf] - 4.0 * c) * inv_h2;
        out[row + j] = kappa_ * lap + c - c * c * c;
      }
    }
  }

  // Edge-difference Dirichlet form: its variational derivative is exactly
  // the 5-point Laplacian used by the dynamics, so eval_energy is discretely
  // consistent with eval_field.
  double energy_quadrature(const Eigen::VectorXd& p) const {
    const int n = n_;
    double grad_sq = 0.0;
    double bulk = 0.0;
    for (int i = 0; i < n; ++i) {
      const int up = (i + 1 == n) ? 0 : i + 1;
      const Eigen::Index row = static_cast<Eigen::Index>(i) * n;
      const Eigen::Index row_up = static_cast<Eigen::Index>(up) * n;
      for (int j = 0; j < n; ++j) {
        const int rt = (j + 1 == n) ? 0 : j + 1;
        const double c = p[row + j];
        const double dx = p[row + rt] - c;
        const double dy = p[row_up + j] - c;
        grad_sq += dx * dx + dy * dy;
        const double w = 1.0 - c * c;
        bulk += 0.25 * w * w;
      }
    }
    return 0.5 * kappa_ * grad_sq + h_ * h_ * bulk;
  }

  double kappa_;
  int n_;
  double h_;
};

class AllenCahn final : public PhaseFieldBase {
 public:
  AllenCahn(double kappa, int n)
      : PhaseFieldBase(kappa, n, SymmetrySpec{TranslationSymmetry::kXY, true}) {}

  bool has_energy() const override { return true; }

 protected:
  void do_eval(const Eigen::VectorXd& p, Eigen::VectorXd& out) const override {
    eval_allen_cahn(p, out);
  }
  double do_energy(const Eigen::VectorXd& p) const override { return energy_quadrature(p); }
};

class ShearedPhaseField final : public PhaseFieldBase {
 public:
  ShearedPhaseField(double kappa, double gamma, int n)
      : PhaseFieldBase(kappa, n, SymmetrySpec{TranslationSymmetry::kXOnly, true}),
        gamma_(gamma),
        shear_row_(n) {
    for (int i = 0; i < n; ++i) shear_row_[i] = gamma_ * std::sin(kTwoPi * i * h_);
  }

 protected:
  void do_eval(const Eigen::VectorXd& p, Eigen::VectorXd& out) const override {
    eval_allen_cahn(p, out);
    const int n = n_;
    const double inv_2h = 1.0 / (2.0 * h_);
    for (int i = 0; i < n; ++i) {
      const double s = shear_row_[i];
      if (s == 0.0) continue;
      const Eigen::Index row = static_cast<Eigen::Index>(i) * n;
      for (int j = 0; j < n; ++j) {
        const int rt = (j + 1 == n) ? 0 : j + 1;
        const int lf = (j == 0) ? n - 1 : j - 1;
        out[row + j] += s * (p[row + rt] - p[row + lf]) * inv_2h;
      }
    }
  }

 private:
  double gamma_;
  std::vector<double> shear_row_;  // gamma * sin(2*pi*y) per grid row
};

class ReversedSystem final : public VectorFieldSystem {
 public:
  explicit ReversedSystem(SystemPtr inner)
      : VectorFieldSystem(inner->dimension(), inner->inner_weight(), inner->symmetry(),
                          inner->grid()),
        inner_(std::move(inner)) {}

 protected:
  void do_eval(const Eigen::VectorXd& x, Eigen::VectorXd& out) const override {
    StateVector in(x);
    if (inner_->grid()) in.grid = inner_->grid();
    StateVector result = inner_->eval_field(in);
    out = -result.values;
  }

 private:
  SystemPtr inner_;
};

}  // namespace

SystemPtr make_system(const SystemSpec& spec) {
  spec.validate();
  SystemPtr base;
  switch (spec.kind) {
    case SystemKind::kQuartic2d:
      base = std::make_shared<Quartic2d>();
      break;
    case SystemKind::kToy3d:
      base = std::make_shared<Toy3d>();
      break;
    case SystemKind::kAllenCahn:
      base = std::make_shared<AllenCahn>(spec.kappa, spec.grid_n);
      break;
    case SystemKind::kShearedPhaseField:
      base = std::make_shared<ShearedPhaseField>(spec.kappa, spec.gamma, spec.grid_n);
      break;
  }
  return spec.reversed ? make_reversed(std::move(base)) : base;
}

SystemPtr make_reversed(SystemPtr inner) {
  return std::make_shared<ReversedSystem>(std::move(inner));
}

StateVector laplacian_periodic(const StateVector& field) {
  if (!field.grid) throw ContractError("laplacian_periodic: missing grid metadata");
  const int rows = field.grid->rows;
  const int cols = field.grid->cols;
  const double inv_h2 = 1.0 / (field.grid->spacing * field.grid->spacing);
  StateVector out(Eigen::VectorXd(field.values.size()), *field.grid);
  const auto& p = field.values;
  for (int i = 0; i < rows; ++i) {
    const int up = (i + 1 == rows) ? 0 : i + 1;
    const int dn = (i == 0) ? rows - 1 : i - 1;
    const Eigen::Index row = static_cast<Eigen::Index>(i) * cols;
    const Eigen::Index row_up = static_cast<Eigen::Index>(up) * cols;
    const Eigen::Index row_dn = static_cast<Eigen::Index>(dn) * cols;
    for (int j = 0; j < cols; ++j) {
      const int rt = (j + 1 == cols) ? 0 : j + 1;
      const int lf = (j == 0) ? cols - 1 : j - 1;
      out.values[row + j] =
          (p[row_up + j] + p[row_dn + j] + p[row + rt] + p[row + lf] - 4.0 * p[row + j]) * inv_h2;
    }
  }
  return out;
}

SearchConfig make_default_config(const SystemSpec& spec) {
  SearchConfig cfg;
  if (spec.is_grid_kind()) {
    const double h = 1.0 / spec.grid_n;
    // explicit-Euler diffusion stability limit h^2/(4 kappa), safety 0.4
    const double dt = 0.4 * h * h / (4.0 * spec.kappa);
    cfg.alpha = dt;
    cfg.beta = dt;
    cfg.eps_perturb = 1e-1;
    cfg.x_tol = 1e-3;
    cfg.max_iters = 50000;
    cfg.max_eigen_iters = 50000;
  }
  return cfg;
}

}  // namespace ghisd

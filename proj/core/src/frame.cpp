#include "ghisd/frame.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ghisd/errors.hpp"

namespace ghisd {

namespace {

constexpr double kRankTol = 1e-12;

// Fixed seed: power iteration must start from generic directions (axis
// vectors can be exact eigenvectors and stall), and runs must be
// reproducible.
constexpr std::uint64_t kProbeSeed = 0x47486953u;  // "GHiS"

Eigen::MatrixXd random_probe_matrix(Eigen::Index n, int k) {
  std::mt19937_64 rng(kProbeSeed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(n, k);
  for (int c = 0; c < k; ++c)
    for (Eigen::Index r = 0; r < n; ++r) m(r, c) = gauss(rng);
  return m;
}

// In-place modified Gram-Schmidt on matrix columns under the weighted
// product; one reorthogonalization pass. Returns nothing; throws on rank
// deficiency.
void orthonormalize_columns(Eigen::MatrixXd& m, double weight) {
  const int k = static_cast<int>(m.cols());
  for (int c = 0; c < k; ++c) {
    for (int pass = 0; pass < 2; ++pass) {
      for (int p = 0; p < c; ++p) {
        const double proj = weight * m.col(p).dot(m.col(c));
        m.col(c) -= proj * m.col(p);
      }
    }
    const double norm = std::sqrt(weight) * m.col(c).norm();
    if (norm < kRankTol) throw DegenerateFrameError(c, norm);
    m.col(c) /= norm;
  }
}

struct DimerScratch {
  StateVector displaced;
  StateVector f_plus;
  StateVector f_minus;
};

// J(x) v approximated by the central difference; writes into out.
void dimer_into(const VectorFieldSystem& system, const StateVector& x,
                const Eigen::Ref<const Eigen::VectorXd>& v, double l, DimerScratch& s,
                Eigen::VectorXd& out) {
  s.displaced.grid = x.grid;
  s.displaced.values = x.values + l * v;
  system.eval_field_into(s.displaced, s.f_plus);
  s.displaced.values = x.values - l * v;
  system.eval_field_into(s.displaced, s.f_minus);
  out = (s.f_plus.values - s.f_minus.values) / (2.0 * l);
}

// Largest principal angle (its sine) between the spans of two weighted-
// orthonormal column sets. Computed from the projection residual, which
// stays accurate for small angles.
double span_angle_sin(const Eigen::MatrixXd& old_basis, const Eigen::MatrixXd& new_basis,
                      double weight) {
  const Eigen::MatrixXd overlap = weight * (old_basis.transpose() * new_basis);
  const Eigen::MatrixXd residual = new_basis - old_basis * overlap;
  const Eigen::MatrixXd gram = weight * (residual.transpose() * residual);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const double lambda_max = es.eigenvalues().maxCoeff();
  return std::sqrt(std::max(0.0, lambda_max));
}

Frame matrix_to_frame(const Eigen::MatrixXd& m, const std::optional<GridMeta>& grid) {
  std::vector<StateVector> dirs;
  dirs.reserve(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    StateVector v(m.col(c));
    v.grid = grid;
    dirs.push_back(std::move(v));
  }
  return Frame(std::move(dirs));
}

}  // namespace

double Frame::orthonormality_defect(double weight) const {
  const int k = count();
  double worst = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      const double d = weighted_dot(directions[i], directions[j], weight) - (i == j ? 1.0 : 0.0);
      worst = std::max(worst, std::abs(d));
    }
  }
  return worst;
}

Frame orthonormalize(const std::vector<StateVector>& raw, double weight) {
  if (raw.empty()) throw ContractError("orthonormalize: need at least one vector");
  const Eigen::Index n = raw.front().size();
  Eigen::MatrixXd m(n, static_cast<Eigen::Index>(raw.size()));
  for (std::size_t c = 0; c < raw.size(); ++c) {
    if (raw[c].size() != n) throw ContractError("orthonormalize: mixed dimensions");
    m.col(static_cast<Eigen::Index>(c)) = raw[c].values;
  }
  orthonormalize_columns(m, weight);
  return matrix_to_frame(m, raw.front().grid);
}

StateVector dimer_derivative(const VectorFieldSystem& system, const StateVector& x,
                             const StateVector& v, double half_length) {
  DimerScratch scratch;
  StateVector out;
  out.values.resize(x.size());
  out.grid = x.grid;
  dimer_into(system, x, v.values, half_length, scratch, out.values);
  return out;
}

double effective_dimer_length(const VectorFieldSystem& system, const StateVector& x,
                              const SearchConfig& cfg) {
  return cfg.dimer_l * std::max(1.0, weighted_norm(x, system.inner_weight()));
}

PowerBasisResult power_unstable_basis(const VectorFieldSystem& system, const StateVector& x,
                                      int k, const SearchConfig& cfg) {
  const Eigen::Index n = system.dimension();
  if (k < 1) throw ContractError("power_unstable_basis: k must be >= 1");
  if (k > n) throw ContractError("power_unstable_basis: k exceeds system dimension");
  const double w = system.inner_weight();
  const double l = effective_dimer_length(system, x, cfg);

  Eigen::MatrixXd basis = random_probe_matrix(n, k);
  orthonormalize_columns(basis, w);

  Eigen::MatrixXd next(n, k);
  Eigen::VectorXd jv(n);
  DimerScratch scratch;

  // Convergence is the principal angle between successive spans. With
  // k == n the full span is all of R^n and that angle is identically zero,
  // so the prefix spans (the flag structure the directions order by) are
  // monitored instead; a stable complex pair can keep a prefix rotating
  // forever, in which case the cap applies and the frame is still usable.
  auto successive_angle = [&](const Eigen::MatrixXd& prev, const Eigen::MatrixXd& cur) {
    if (k < n) return span_angle_sin(prev, cur, w);
    double worst = 0.0;
    for (int i = 1; i < k; ++i)
      worst = std::max(worst, span_angle_sin(prev.leftCols(i), cur.leftCols(i), w));
    return worst;
  };

  PowerBasisResult result;
  for (std::int64_t it = 1; it <= cfg.max_eigen_iters; ++it) {
    for (int c = 0; c < k; ++c) {
      dimer_into(system, x, basis.col(c), l, scratch, jv);
      next.col(c) = basis.col(c) + cfg.beta * jv;
    }
    orthonormalize_columns(next, w);
    const double angle = successive_angle(basis, next);
    basis.swap(next);
    result.iterations = it;
    if (angle <= cfg.subspace_tol) {
      result.converged = true;
      break;
    }
  }
  result.frame = matrix_to_frame(basis, x.grid);
  return result;
}

IndexReport estimate_index(const VectorFieldSystem& system, const StateVector& x, int probes,
                           const SearchConfig& cfg, bool require_stationary) {
  if (probes < 1) throw ContractError("estimate_index: probes must be >= 1");
  const int k = std::min<int>(probes, system.dimension());
  const double w = system.inner_weight();

  if (require_stationary) {
    const double res = weighted_norm(system.eval_field(x), w);
    if (res > cfg.residual_tol)
      throw PreconditionError("estimate_index: point is not stationary (residual " +
                              std::to_string(res) + ")");
  }

  PowerBasisResult power = power_unstable_basis(system, x, k, cfg);

  // Projected matrix A_ij = <J v_j, v_i> via dimer products.
  const double l = effective_dimer_length(system, x, cfg);
  Eigen::MatrixXd jv_all(system.dimension(), k);
  DimerScratch scratch;
  Eigen::VectorXd jv(system.dimension());
  Eigen::MatrixXd basis(system.dimension(), k);
  for (int c = 0; c < k; ++c) basis.col(c) = power.frame[c].values;
  for (int c = 0; c < k; ++c) {
    dimer_into(system, x, basis.col(c), l, scratch, jv);
    jv_all.col(c) = jv;
  }
  const Eigen::MatrixXd projected = w * (basis.transpose() * jv_all);

  Eigen::EigenSolver<Eigen::MatrixXd> es(projected, /*computeEigenvectors=*/false);
  IndexReport report;
  report.power_converged = power.converged;
  int positive = 0;
  int zeros = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double re = es.eigenvalues()[i].real();
    if (re > cfg.zero_tol)
      ++positive;
    else if (std::abs(re) <= cfg.zero_tol)
      ++zeros;
  }
  report.index = positive;
  report.zero_count = zeros;
  report.possibly_truncated = (positive == k);

  report.rayleigh.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) report.rayleigh[static_cast<std::size_t>(i)] = projected(i, i);

  // Directions ordered by their Rayleigh diagonal so the leading `index`
  // of them span the unstable subspace even if zero modes interleave.
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return projected(a, a) > projected(b, b);
  });
  std::vector<StateVector> unstable;
  unstable.reserve(static_cast<std::size_t>(positive));
  for (int i = 0; i < positive; ++i) unstable.push_back(power.frame[order[static_cast<std::size_t>(i)]]);
  report.basis = Frame(std::move(unstable));

  std::sort(report.rayleigh.begin(), report.rayleigh.end(), std::greater<>());
  return report;
}

}  // namespace ghisd

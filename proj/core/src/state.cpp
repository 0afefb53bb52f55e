#include "ghisd/state.hpp"

#include "ghisd/errors.hpp"

namespace ghisd {

StateVector cyclic_shift(const StateVector& a, int row_shift, int col_shift) {
  if (!a.grid) throw ContractError("cyclic_shift: state has no grid metadata");
  const int rows = a.grid->rows;
  const int cols = a.grid->cols;
  auto wrap = [](int v, int n) {
    v %= n;
    return v < 0 ? v + n : v;
  };
  const int si = wrap(row_shift, rows);
  const int sj = wrap(col_shift, cols);
  StateVector out(Eigen::VectorXd(a.values.size()), *a.grid);
  for (int i = 0; i < rows; ++i) {
    const int src_i = wrap(i - si, rows);
    for (int j = 0; j < cols; ++j) {
      const int src_j = wrap(j - sj, cols);
      out.values[static_cast<Eigen::Index>(i) * cols + j] =
          a.values[static_cast<Eigen::Index>(src_i) * cols + src_j];
    }
  }
  return out;
}

}  // namespace ghisd

#include "slp/numerics/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slp/errors.hpp"

namespace slp::numerics {

LpSolution lp_min_sum(const RealMatrix& f, const RealVector& g) {
  const Eigen::Index k = f.rows();
  if (k < 1 || f.cols() != k || g.size() != k) {
    throw std::invalid_argument("lp_min_sum: F must be K x K and g of length K");
  }
  if (!f.allFinite() || !g.allFinite()) throw std::invalid_argument("lp_min_sum: non-finite input");
  if ((f.array() < 0.0).any() || (g.array() < 0.0).any()) {
    throw std::invalid_argument("lp_min_sum: F and g must be nonnegative");
  }

  // Tableau for F^T y + s = 1; columns [y_0..y_{k-1} | s_0..s_{k-1} | rhs].
  // The last row holds z_j - c_j for the objective max g.y.
  const Eigen::Index cols = 2 * k;
  RealMatrix t = RealMatrix::Zero(k + 1, cols + 1);
  t.topLeftCorner(k, k) = f.transpose();
  t.block(0, k, k, k).setIdentity();
  t.col(cols).head(k).setOnes();
  t.row(k).head(k) = -g.transpose();

  std::vector<Eigen::Index> basis(k);
  for (Eigen::Index i = 0; i < k; ++i) basis[i] = k + i;

  const double scale = std::max({1.0, f.maxCoeff(), g.maxCoeff()});
  const double tol = 1e-12 * scale;
  const int max_pivots = 1000 + 100 * static_cast<int>(k * k);

  for (int it = 0;; ++it) {
    if (it > max_pivots) throw SolverFailure("lp_min_sum: pivot limit reached", t(k, cols));

    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (t(k, j) < -tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    double best_ratio = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (t(i, enter) <= tol) continue;
      const double ratio = t(i, cols) / t(i, enter);
      if (leave < 0 || ratio < best_ratio - 1e-15 ||
          (std::abs(ratio - best_ratio) <= 1e-15 && basis[i] < basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave < 0) {
      throw InfeasibleError("lp_min_sum: F p >= g has no nonnegative solution",
                            g(enter < k ? enter : 0));
    }

    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= k; ++i) {
      if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
    }
    basis[leave] = enter;
  }

  LpSolution out;
  out.p = t.row(k).segment(k, k).transpose().cwiseMax(0.0);
  out.dual = RealVector::Zero(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (basis[i] < k) out.dual(basis[i]) = t(i, cols);
  }
  out.total = out.p.sum();

  const double worst = (g - f * out.p).maxCoeff();
  if (worst > 1e-9 * std::max(1.0, g.maxCoeff())) {
    throw SolverFailure("lp_min_sum: recovered primal violates F p >= g", worst);
  }
  return out;
}

}  // namespace slp::numerics

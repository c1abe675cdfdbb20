#include "slp/numerics/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "slp/errors.hpp"

namespace slp::numerics {

RealConstraintSystem RealConstraintSystem::with_variables(Eigen::Index n) {
  return {RealMatrix(0, n), RealVector(0), RealMatrix(0, n), RealVector(0)};
}

void RealConstraintSystem::validate() const {
  if (eq_matrix.cols() != ineq_matrix.cols()) {
    throw std::invalid_argument("RealConstraintSystem: column counts disagree");
  }
  if (eq_matrix.cols() < 1) {
    throw std::invalid_argument("RealConstraintSystem: no variables");
  }
  if (eq_matrix.rows() != eq_rhs.size() || ineq_matrix.rows() != ineq_rhs.size()) {
    throw std::invalid_argument("RealConstraintSystem: rhs length mismatch");
  }
  if (!eq_matrix.allFinite() || !ineq_matrix.allFinite() || !eq_rhs.allFinite() ||
      !ineq_rhs.allFinite()) {
    throw std::invalid_argument("RealConstraintSystem: non-finite entry");
  }
}

namespace {

constexpr int kMaxInequalities = 16;

// Min-norm solution of A x = b restricted to the row space of A, with
// x = A^T nu. Column-pivoted QR of A^T: A^T P = Q R, so rank-deficient but
// consistent rows are handled; consistency is the caller's job.
class RowSpaceSolver {
 public:
  void solve(const RealMatrix& a, const RealVector& b, RealVector& x, RealVector& nu) {
    const Eigen::Index n = a.cols();
    const Eigen::Index m = a.rows();
    x.setZero(n);
    nu.setZero(m);
    if (m == 0) return;
    qr_.setThreshold(1e-12);
    qr_.compute(a.transpose());
    const Eigen::Index r = qr_.rank();
    if (r == 0) return;
    const auto r11 = qr_.matrixR().topLeftCorner(r, r).template triangularView<Eigen::Upper>();
    const RealVector c = qr_.colsPermutation().transpose() * b;
    const RealVector z = r11.transpose().solve(c.head(r));
    RealVector padded = RealVector::Zero(n);
    padded.head(r) = z;
    x = qr_.householderQ() * padded;
    RealVector w = RealVector::Zero(m);
    w.head(r) = r11.solve(z);
    nu = qr_.colsPermutation() * w;
  }

 private:
  Eigen::ColPivHouseholderQR<RealMatrix> qr_;
};

bool lexicographically_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

QpSolution min_norm_qp(const RealConstraintSystem& system) {
  system.validate();
  const Eigen::Index n = system.variables();
  const Eigen::Index n_eq = system.eq_matrix.rows();
  const Eigen::Index n_in = system.ineq_matrix.rows();
  if (n_in > kMaxInequalities) {
    throw std::invalid_argument("min_norm_qp: more than 16 inequality rows");
  }

  RealMatrix rows(n_eq + n_in, n);
  rows << system.eq_matrix, system.ineq_matrix;
  RealVector rhs(n_eq + n_in);
  rhs << system.eq_rhs, system.ineq_rhs;

  const double scale = std::max(1.0, rhs.size() ? rhs.lpNorm<Eigen::Infinity>() : 0.0);
  const double feas_tol = 1e-9 * scale;

  RowSpaceSolver solver;
  std::vector<Eigen::Index> idx;
  RealMatrix a_sub;
  RealVector b_sub, nu, x;

  bool found = false;
  double best_power = std::numeric_limits<double>::infinity();
  double least_violation = std::numeric_limits<double>::infinity();
  std::vector<int> best_set, set;
  RealVector best_x, best_nu;
  std::vector<Eigen::Index> best_idx;

  const unsigned masks = 1u << n_in;
  for (unsigned mask = 0; mask < masks; ++mask) {
    idx.clear();
    set.clear();
    for (Eigen::Index i = 0; i < n_eq; ++i) idx.push_back(i);
    for (Eigen::Index i = 0; i < n_in; ++i) {
      if (mask & (1u << i)) {
        idx.push_back(n_eq + i);
        set.push_back(static_cast<int>(i));
      }
    }
    const auto m = static_cast<Eigen::Index>(idx.size());
    a_sub.resize(m, n);
    b_sub.resize(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      a_sub.row(r) = rows.row(idx[r]);
      b_sub(r) = rhs(idx[r]);
    }
    solver.solve(a_sub, b_sub, x, nu);

    double violation = 0.0;
    for (Eigen::Index r = 0; r < m; ++r) {
      violation = std::max(violation, std::abs(rows.row(idx[r]).dot(x) - rhs(idx[r])));
    }
    for (Eigen::Index i = 0; i < n_in; ++i) {
      if (!(mask & (1u << i))) {
        violation = std::max(violation, rhs(n_eq + i) - rows.row(n_eq + i).dot(x));
      }
    }
    least_violation = std::min(least_violation, violation);
    if (violation > feas_tol) continue;

    const double power = x.squaredNorm();
    const double tie = 1e-12 * std::max(1.0, std::max(power, found ? best_power : 0.0));
    const bool better = !found || power < best_power - tie ||
                        (std::abs(power - best_power) <= tie && lexicographically_less(set, best_set));
    if (better) {
      found = true;
      best_power = power;
      best_set = set;
      best_x = x;
      best_nu = nu;
      best_idx = idx;
    }
  }

  if (!found) {
    throw InfeasibleError("min_norm_qp: constraint system is infeasible", least_violation);
  }

  QpSolution out;
  out.x = best_x;
  out.active_set = best_set;
  out.eq_multipliers = RealVector::Zero(n_eq);
  out.ineq_multipliers = RealVector::Zero(n_in);
  RealVector grad_check = 2.0 * best_x;
  for (std::size_t r = 0; r < best_idx.size(); ++r) {
    const double mult = 2.0 * best_nu(static_cast<Eigen::Index>(r));
    const Eigen::Index row = best_idx[r];
    if (row < n_eq) {
      out.eq_multipliers(row) = mult;
    } else {
      out.ineq_multipliers(row - n_eq) = mult;
    }
    grad_check -= mult * rows.row(row).transpose();
  }
  out.stationarity_residual = grad_check.norm();
  for (Eigen::Index i = 0; i < n_in; ++i) {
    const double slack = rows.row(n_eq + i).dot(best_x) - rhs(n_eq + i);
    out.complementarity = std::max(out.complementarity, std::abs(out.ineq_multipliers(i) * slack));
  }
  return out;
}

}  // namespace slp::numerics

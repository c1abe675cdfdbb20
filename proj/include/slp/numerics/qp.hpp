#pragma once

#include <vector>

#include "slp/numerics/linalg.hpp"

namespace slp::numerics {

/// Linear constraints over n real variables:
///   eq_matrix * x == eq_rhs,   ineq_matrix * x >= ineq_rhs.
/// Either block may have zero rows, but both must have n columns.
struct RealConstraintSystem {
  RealMatrix eq_matrix;
  RealVector eq_rhs;
  RealMatrix ineq_matrix;
  RealVector ineq_rhs;

  static RealConstraintSystem with_variables(Eigen::Index n);

  Eigen::Index variables() const { return std::max(eq_matrix.cols(), ineq_matrix.cols()); }
  void validate() const;
};

/// Minimizer of ||x||^2 plus its KKT data.
///
/// Multipliers use the Lagrangian ||x||^2 - nu_eq.(A_eq x - b_eq) - nu_in.(A_in x - b_in),
/// so stationarity reads 2x = A_eq^T nu_eq + A_in^T nu_in and nu_in >= 0.
/// `ineq_multipliers` is zero outside the active set.
struct QpSolution {
  RealVector x;
  std::vector<int> active_set;  // ascending
  RealVector eq_multipliers;
  RealVector ineq_multipliers;
  double stationarity_residual = 0.0;
  double complementarity = 0.0;
};

/// Exact minimum-norm point of a small convex polyhedron by exhaustive
/// active-set enumeration (at most 16 inequality rows).
///
/// Every subset S of inequalities is tried as a set of equalities; the
/// min-norm point of each system is kept if it satisfies all constraints to
/// 1e-9 * max(1, |b|_inf). The feasible candidate of least norm is the
/// minimizer; ties go to the lexicographically smallest S. Redundant but
/// consistent equality rows are accepted.
///
/// Throws InfeasibleError (violation = least max-violation over candidates).
QpSolution min_norm_qp(const RealConstraintSystem& system);

}  // namespace slp::numerics

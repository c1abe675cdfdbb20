#pragma once

#include <complex>

#include <Eigen/Dense>

namespace slp::numerics {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using ComplexRow = Eigen::RowVectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Hermitian matrix stored through its lower triangle. The upper triangle is
/// never read, so A == A^H holds exactly for every value handed out.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(Eigen::Index dim);

  /// Takes the lower triangle of `a`; the strict upper triangle is ignored
  /// and the imaginary part of the diagonal is dropped.
  static HermitianMatrix from_lower(const ComplexMatrix& a);

  Eigen::Index dim() const noexcept { return lower_.rows(); }
  Complex operator()(Eigen::Index row, Eigen::Index col) const;
  void set(Eigen::Index row, Eigen::Index col, Complex value);

  ComplexMatrix dense() const;
  double trace() const;

 private:
  ComplexMatrix lower_;
};

struct SvdResult {
  ComplexMatrix u;                 // rows x r, orthonormal columns
  RealVector singular_values;      // r = min(rows, cols), non-increasing
  ComplexMatrix v;                 // cols x r, orthonormal columns
};

/// Thin SVD with a reconstruction check: throws SolverFailure carrying the
/// residual when ||A - U diag(S) V^H||_F exceeds 1e-10 ||A||_F.
SvdResult svd(const ComplexMatrix& a);

/// Numerical rank from singular values, relative threshold on the largest.
int numerical_rank(const RealVector& singular_values, double relative_tol = 1e-12);

/// Moore-Penrose pseudo-inverse via svd(); singular values below
/// max(rows, cols) * eps * s_max are treated as zero.
ComplexMatrix pseudo_inverse(const ComplexMatrix& a);

double min_eigenvalue(const HermitianMatrix& a);
double max_eigenvalue(const HermitianMatrix& a);

bool all_finite(const ComplexMatrix& a);

}  // namespace slp::numerics

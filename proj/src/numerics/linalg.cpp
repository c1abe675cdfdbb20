#include "slp/numerics/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "slp/errors.hpp"

namespace slp::numerics {

HermitianMatrix::HermitianMatrix(Eigen::Index dim)
    : lower_(ComplexMatrix::Zero(dim, dim)) {}

HermitianMatrix HermitianMatrix::from_lower(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("HermitianMatrix: matrix must be square");
  }
  HermitianMatrix h(a.rows());
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    h.lower_(c, c) = Complex(a(c, c).real(), 0.0);
    for (Eigen::Index r = c + 1; r < a.rows(); ++r) h.lower_(r, c) = a(r, c);
  }
  return h;
}

Complex HermitianMatrix::operator()(Eigen::Index row, Eigen::Index col) const {
  return row >= col ? lower_(row, col) : std::conj(lower_(col, row));
}

void HermitianMatrix::set(Eigen::Index row, Eigen::Index col, Complex value) {
  if (row == col) {
    lower_(row, col) = Complex(value.real(), 0.0);
  } else if (row > col) {
    lower_(row, col) = value;
  } else {
    lower_(col, row) = std::conj(value);
  }
}

ComplexMatrix HermitianMatrix::dense() const {
  ComplexMatrix out(dim(), dim());
  for (Eigen::Index r = 0; r < dim(); ++r) {
    for (Eigen::Index c = 0; c < dim(); ++c) out(r, c) = (*this)(r, c);
  }
  return out;
}

double HermitianMatrix::trace() const {
  double t = 0.0;
  for (Eigen::Index i = 0; i < dim(); ++i) t += lower_(i, i).real();
  return t;
}

bool all_finite(const ComplexMatrix& a) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const Complex z = a.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

SvdResult svd(const ComplexMatrix& a) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw std::invalid_argument("svd: empty matrix");
  }
  if (!all_finite(a)) throw std::invalid_argument("svd: non-finite entry");

  Eigen::JacobiSVD<ComplexMatrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out{solver.matrixU(), solver.singularValues(), solver.matrixV()};

  const double scale = a.norm();
  const double residual =
      (a - out.u * out.singular_values.cast<Complex>().asDiagonal() * out.v.adjoint()).norm();
  if (residual > 1e-10 * scale) {
    throw SolverFailure("svd: reconstruction residual above tolerance", residual);
  }
  return out;
}

int numerical_rank(const RealVector& singular_values, double relative_tol) {
  if (singular_values.size() == 0) return 0;
  const double top = singular_values.maxCoeff();
  if (top == 0.0) return 0;
  return static_cast<int>(
      std::count_if(singular_values.begin(), singular_values.end(),
                    [&](double s) { return s > relative_tol * top; }));
}

ComplexMatrix pseudo_inverse(const ComplexMatrix& a) {
  const SvdResult f = svd(a);
  const double top = f.singular_values.size() ? f.singular_values.maxCoeff() : 0.0;
  const double tol = static_cast<double>(std::max(a.rows(), a.cols())) *
                     std::numeric_limits<double>::epsilon() * top;
  RealVector inv = RealVector::Zero(f.singular_values.size());
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    if (f.singular_values(i) > tol) inv(i) = 1.0 / f.singular_values(i);
  }
  return f.v * inv.cast<Complex>().asDiagonal() * f.u.adjoint();
}

namespace {

RealVector eigenvalues_of(const HermitianMatrix& a) {
  if (a.dim() < 1) throw std::invalid_argument("eigenvalue: empty matrix");
  const ComplexMatrix dense = a.dense();
  if (!all_finite(dense)) throw std::invalid_argument("eigenvalue: non-finite entry");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(dense, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

}  // namespace

double min_eigenvalue(const HermitianMatrix& a) { return eigenvalues_of(a).minCoeff(); }

double max_eigenvalue(const HermitianMatrix& a) { return eigenvalues_of(a).maxCoeff(); }

}  // namespace slp::numerics

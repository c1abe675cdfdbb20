#pragma once

#include <cmath>
#include <random>

#include "slp/numerics/linalg.hpp"

namespace slp::testing {

using numerics::Complex;
using numerics::ComplexMatrix;
using numerics::RealMatrix;
using numerics::RealVector;

inline ComplexMatrix random_complex(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  ComplexMatrix a(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double re = n(rng);
      const double im = n(rng);
      a(r, c) = {re, im};
    }
  }
  return a;
}

inline RealMatrix random_real(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                              double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  RealMatrix a(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) a(r, c) = u(rng);
  }
  return a;
}

inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace slp::testing

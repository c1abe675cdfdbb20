#include <algorithm>
#include <random>

#include "doctest.h"
#include "slp/errors.hpp"
#include "slp/numerics/linalg.hpp"
#include "slp/numerics/lp.hpp"
#include "slp/numerics/qp.hpp"
#include "slp/numerics/sdp.hpp"
#include "slp/oracles.hpp"
#include "support.hpp"

using namespace slp;
using namespace slp::numerics;
using slp::testing::random_complex;
using slp::testing::random_real;

namespace {

double orthonormality_residual(const ComplexMatrix& q) {
  return (q.adjoint() * q - ComplexMatrix::Identity(q.cols(), q.cols())).norm();
}

// Feasible random system: b_eq = A_eq x0, b_in = A_in x0 - slack.
RealConstraintSystem random_system(std::mt19937_64& rng, int n, int n_eq, int n_in) {
  RealConstraintSystem s;
  s.eq_matrix = random_real(rng, n_eq, n);
  s.ineq_matrix = random_real(rng, n_in, n);
  const RealVector x0 = random_real(rng, n, 1, -2.0, 2.0);
  s.eq_rhs = s.eq_matrix * x0;
  s.ineq_rhs = s.ineq_matrix * x0 - random_real(rng, n_in, 1, 0.0, 0.5);
  return s;
}

}  // namespace

TEST_SUITE("svd") {
  TEST_CASE("identity has unit singular values and identity factors") {
    const auto r = svd(ComplexMatrix::Identity(2, 2));
    CHECK(r.singular_values(0) == doctest::Approx(1.0));
    CHECK(r.singular_values(1) == doctest::Approx(1.0));
    CHECK((r.u * r.v.adjoint() - ComplexMatrix::Identity(2, 2)).norm() < 1e-12);
  }

  TEST_CASE("diag(3, 0) gives singular values (3, 0)") {
    ComplexMatrix a = ComplexMatrix::Zero(2, 2);
    a(0, 0) = 3.0;
    const auto r = svd(a);
    CHECK(r.singular_values(0) == doctest::Approx(3.0));
    CHECK(std::abs(r.singular_values(1)) < 1e-15);
  }

  TEST_CASE("random matrices up to 6x6 reconstruct with orthonormal factors") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> dim(1, 6);
    for (int t = 0; t < 1000; ++t) {
      const ComplexMatrix a = random_complex(rng, dim(rng), dim(rng));
      const auto r = svd(a);
      const double scale = a.norm();
      const ComplexMatrix rebuilt = r.u * r.singular_values.cast<Complex>().asDiagonal() * r.v.adjoint();
      REQUIRE((a - rebuilt).norm() <= 1e-10 * scale);
      REQUIRE(orthonormality_residual(r.u) <= 1e-10);
      REQUIRE(orthonormality_residual(r.v) <= 1e-10);
      for (Eigen::Index i = 1; i < r.singular_values.size(); ++i) {
        REQUIRE(r.singular_values(i) <= r.singular_values(i - 1));
      }
    }
  }

  TEST_CASE("numerical rank counts singular values above the relative threshold") {
    RealVector s(3);
    s << 2.0, 1e-3, 1e-14;
    CHECK(numerical_rank(s) == 2);
    CHECK(numerical_rank(s, 1e-2) == 1);
  }
}

TEST_SUITE("pseudo_inverse") {
  TEST_CASE("identity maps to identity") {
    CHECK((pseudo_inverse(ComplexMatrix::Identity(3, 3)) - ComplexMatrix::Identity(3, 3)).norm() <
          1e-12);
  }

  TEST_CASE("row vector [2, 0] inverts to column [0.5, 0]") {
    ComplexMatrix a(1, 2);
    a << 2.0, 0.0;
    const ComplexMatrix p = pseudo_inverse(a);
    REQUIRE(p.rows() == 2);
    REQUIRE(p.cols() == 1);
    CHECK(std::abs(p(0, 0) - Complex(0.5, 0.0)) < 1e-15);
    CHECK(std::abs(p(1, 0)) < 1e-15);
  }

  TEST_CASE("random matrices satisfy the four Moore-Penrose identities") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 200; ++t) {
      const ComplexMatrix a = t % 2 ? random_complex(rng, 2, 3) : random_complex(rng, 4, 3);
      const ComplexMatrix p = pseudo_inverse(a);
      const double tol = 1e-9 * a.norm();
      CHECK((a * p * a - a).norm() <= tol);
      CHECK((p * a * p - p).norm() <= 1e-9 * p.norm());
      CHECK(((a * p).adjoint() - a * p).norm() <= 1e-9);
      CHECK(((p * a).adjoint() - p * a).norm() <= 1e-9);
    }
  }

  TEST_CASE("full-row-rank 2x3 gives a right inverse") {
    std::mt19937_64 rng(13);
    const ComplexMatrix a = random_complex(rng, 2, 3);
    CHECK((a * pseudo_inverse(a) - ComplexMatrix::Identity(2, 2)).norm() < 1e-9);
  }
}

TEST_SUITE("min_norm_qp") {
  TEST_CASE("single equality gives the least-norm projection") {
    auto s = RealConstraintSystem::with_variables(2);
    s.eq_matrix = RealMatrix{{1.0, 0.0}};
    s.eq_rhs = RealVector::Constant(1, 2.0);
    const auto r = min_norm_qp(s);
    CHECK(r.x(0) == doctest::Approx(2.0));
    CHECK(std::abs(r.x(1)) < 1e-15);
    CHECK(r.active_set.empty());
  }

  TEST_CASE("single inequality is active at the solution") {
    auto s = RealConstraintSystem::with_variables(2);
    s.ineq_matrix = RealMatrix{{1.0, 0.0}};
    s.ineq_rhs = RealVector::Constant(1, 3.0);
    const auto r = min_norm_qp(s);
    CHECK(r.x(0) == doctest::Approx(3.0));
    CHECK(std::abs(r.x(1)) < 1e-15);
    REQUIRE(r.active_set.size() == 1);
    CHECK(r.active_set[0] == 0);
    CHECK(r.ineq_multipliers(0) == doctest::Approx(6.0));  // gradient of ||x||^2
  }

  TEST_CASE("random systems match active-set enumeration and satisfy KKT") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 300; ++t) {
      const auto s = random_system(rng, 4, 2, 2);
      const auto r = min_norm_qp(s);
      const auto oracle = oracles::enumerate_qp(s);
      REQUIRE((r.x - oracle.x).norm() <= 1e-8 * std::max(1.0, oracle.x.norm()));
      CHECK(r.stationarity_residual <= 1e-8);
      CHECK(r.complementarity <= 1e-8);
      CHECK(r.ineq_multipliers.minCoeff() >= -1e-10);
      CHECK((s.eq_matrix * r.x - s.eq_rhs).lpNorm<Eigen::Infinity>() <= 1e-9);
      CHECK((s.ineq_matrix * r.x - s.ineq_rhs).minCoeff() >= -1e-9);
    }
  }

  TEST_CASE("no inequalities equals the closed-form least-norm solution") {
    std::mt19937_64 rng(22);
    for (int t = 0; t < 100; ++t) {
      auto s = RealConstraintSystem::with_variables(5);
      s.eq_matrix = random_real(rng, 3, 5);
      s.eq_rhs = random_real(rng, 3, 1);
      const RealMatrix& a = s.eq_matrix;
      const RealVector closed = a.transpose() * (a * a.transpose()).ldlt().solve(s.eq_rhs);
      CHECK((min_norm_qp(s).x - closed).norm() <= 1e-10 * std::max(1.0, closed.norm()));
    }
  }

  TEST_CASE("dropping an inactive inequality leaves the minimizer unchanged") {
    std::mt19937_64 rng(23);
    int dropped = 0;
    for (int t = 0; t < 200; ++t) {
      const auto s = random_system(rng, 4, 1, 3);
      const auto r = min_norm_qp(s);
      for (Eigen::Index i = 0; i < 3; ++i) {
        if (std::find(r.active_set.begin(), r.active_set.end(), i) != r.active_set.end()) continue;
        auto reduced = s;
        reduced.ineq_matrix = RealMatrix(2, 4);
        reduced.ineq_rhs = RealVector(2);
        for (Eigen::Index k = 0, row = 0; k < 3; ++k) {
          if (k == i) continue;
          reduced.ineq_matrix.row(row) = s.ineq_matrix.row(k);
          reduced.ineq_rhs(row++) = s.ineq_rhs(k);
        }
        CHECK((min_norm_qp(reduced).x - r.x).norm() <= 1e-9 * std::max(1.0, r.x.norm()));
        ++dropped;
      }
    }
    CHECK(dropped > 50);
  }

  TEST_CASE("contradictory constraints raise an infeasibility error with a positive residual") {
    auto s = RealConstraintSystem::with_variables(2);
    s.eq_matrix = RealMatrix{{1.0, 0.0}};
    s.eq_rhs = RealVector::Constant(1, 1.0);
    s.ineq_matrix = RealMatrix{{1.0, 0.0}};
    s.ineq_rhs = RealVector::Constant(1, 2.0);
    try {
      min_norm_qp(s);
      FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
      CHECK(e.violation() > 0.1);
    }
  }

  TEST_CASE("inconsistent rank-deficient equalities are infeasible") {
    auto s = RealConstraintSystem::with_variables(2);
    s.eq_matrix = RealMatrix{{1.0, 1.0}, {2.0, 2.0}};
    s.eq_rhs = RealVector{{1.0, 3.0}};
    CHECK_THROWS_AS(min_norm_qp(s), InfeasibleError);
  }

  TEST_CASE("consistent rank-deficient equalities are solved") {
    auto s = RealConstraintSystem::with_variables(2);
    s.eq_matrix = RealMatrix{{1.0, 1.0}, {2.0, 2.0}};
    s.eq_rhs = RealVector{{1.0, 2.0}};
    const auto r = min_norm_qp(s);
    CHECK(r.x(0) == doctest::Approx(0.5));
    CHECK(r.x(1) == doctest::Approx(0.5));
  }

  TEST_CASE("equal-power candidates resolve to the lexicographically smallest active set") {
    // Two identical inequalities: {0} and {1} and {0, 1} give the same point.
    auto s = RealConstraintSystem::with_variables(2);
    s.ineq_matrix = RealMatrix{{1.0, 0.0}, {1.0, 0.0}};
    s.ineq_rhs = RealVector{{1.0, 1.0}};
    const auto r = min_norm_qp(s);
    REQUIRE(r.active_set.size() == 1);
    CHECK(r.active_set[0] == 0);
  }

  TEST_CASE("column-count mismatch is rejected") {
    RealConstraintSystem s;
    s.eq_matrix = RealMatrix::Zero(1, 2);
    s.eq_rhs = RealVector::Zero(1);
    s.ineq_matrix = RealMatrix::Zero(1, 3);
    s.ineq_rhs = RealVector::Zero(1);
    CHECK_THROWS_AS(min_norm_qp(s), std::invalid_argument);
  }
}

TEST_SUITE("lp_min_sum") {
  TEST_CASE("decoupled constraints") {
    const auto r = lp_min_sum(RealMatrix::Identity(2, 2), RealVector{{1.0, 2.0}});
    CHECK(r.p(0) == doctest::Approx(1.0));
    CHECK(r.p(1) == doctest::Approx(2.0));
    CHECK(r.total == doctest::Approx(3.0));
  }

  TEST_CASE("shared constraint gives total one") {
    const auto r = lp_min_sum(RealMatrix::Ones(2, 2), RealVector{{1.0, 1.0}});
    CHECK(r.total == doctest::Approx(1.0));
    CHECK(r.p.sum() == doctest::Approx(1.0));
    CHECK(r.p.minCoeff() >= 0.0);
  }

  TEST_CASE("random 3x3 instances match vertex enumeration") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 500; ++t) {
      const RealMatrix f = random_real(rng, 3, 3, 0.1, 2.0);
      const RealVector g = random_real(rng, 3, 1, 0.5, 2.0);
      const auto r = lp_min_sum(f, g);
      const auto oracle = oracles::enumerate_lp(f, g);
      REQUIRE(std::abs(r.total - oracle.total) <= 1e-9 * std::max(1.0, oracle.total));
      CHECK((f * r.p - g).minCoeff() >= -1e-9);
      CHECK(r.p.minCoeff() >= -1e-12);
      CHECK(r.dual.dot(g) == doctest::Approx(r.total).epsilon(1e-9));
    }
  }

  TEST_CASE("objective is monotone in every entry of g") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> bump(0.0, 0.5);
    for (int t = 0; t < 200; ++t) {
      const RealMatrix f = random_real(rng, 3, 3, 0.1, 2.0);
      const RealVector g = random_real(rng, 3, 1, 0.5, 2.0);
      const double base = lp_min_sum(f, g).total;
      for (Eigen::Index i = 0; i < 3; ++i) {
        RealVector g2 = g;
        g2(i) += bump(rng);
        CHECK(lp_min_sum(f, g2).total >= base - 1e-12);
      }
    }
  }

  TEST_CASE("a zero row with positive demand is infeasible") {
    RealMatrix f{{1.0, 0.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(lp_min_sum(f, RealVector{{1.0, 1.0}}), InfeasibleError);
  }
}

TEST_SUITE("sdp_multicast_dual") {
  TEST_CASE("single user binds at lambda = 1 / ||h||^2") {
    ComplexMatrix h(1, 2);
    h << 1.0, 0.0;
    const auto r = sdp_multicast_dual(h, RealVector::Constant(1, 2.0));
    CHECK(r.lambda(0) == doctest::Approx(1.0));
    CHECK(r.value == doctest::Approx(2.0));
  }

  TEST_CASE("orthonormal rows decouple") {
    const ComplexMatrix h = ComplexMatrix::Identity(2, 2);
    const auto r = sdp_multicast_dual(h, RealVector{{1.0, 1.0}});
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-9));
  }

  TEST_CASE("random two-user channels match the dual grid oracle and stay feasible") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> z(0.5, 8.0);
    for (int t = 0; t < 60; ++t) {
      const ComplexMatrix h = random_complex(rng, 2, 3);
      const RealVector zeta{{z(rng), z(rng)}};
      const auto r = sdp_multicast_dual(h, zeta);
      const double oracle = oracles::multicast_dual_grid(h, std::vector<double>{zeta(0), zeta(1)});
      CHECK(std::abs(r.value - oracle) <= 1e-6 * oracle);
      ComplexMatrix s = ComplexMatrix::Identity(3, 3);
      for (Eigen::Index j = 0; j < 2; ++j) s -= r.lambda(j) * h.row(j).adjoint() * h.row(j);
      CHECK(min_eigenvalue(HermitianMatrix::from_lower(s)) >= -1e-9);
      CHECK(r.lambda.minCoeff() >= 0.0);
    }
  }

  TEST_CASE("weak duality against a feasible covariance") {
    std::mt19937_64 rng(42);
    for (int t = 0; t < 100; ++t) {
      const ComplexMatrix h = random_complex(rng, 3, 4);
      const RealVector zeta = random_real(rng, 3, 1, 0.1, 5.0);
      // Q = sum zeta_j h_j^H h_j / ||h_j||^4 meets every constraint.
      ComplexMatrix q = ComplexMatrix::Zero(4, 4);
      for (Eigen::Index j = 0; j < 3; ++j) {
        q += zeta(j) * h.row(j).adjoint() * h.row(j) / std::pow(h.row(j).squaredNorm(), 2);
      }
      const auto r = sdp_multicast_dual(h, zeta);
      CHECK(r.value <= q.trace().real() + 1e-9);
    }
  }

  TEST_CASE("zero channel is degenerate") {
    ComplexMatrix h = ComplexMatrix::Zero(2, 2);
    h(0, 0) = 1.0;
    CHECK_THROWS_AS(sdp_multicast_dual(h, RealVector{{1.0, 1.0}}), DegenerateInput);
  }

  TEST_CASE("simplex projection") {
    const RealVector p = project_to_simplex(RealVector{{0.5, 2.0, -1.0}});
    CHECK(p.sum() == doctest::Approx(1.0));
    CHECK(p(1) == doctest::Approx(1.0));
    CHECK(p.minCoeff() >= 0.0);
  }
}

TEST_SUITE("eigenvalues") {
  TEST_CASE("identity") {
    CHECK(min_eigenvalue(HermitianMatrix::from_lower(ComplexMatrix::Identity(2, 2))) ==
          doctest::Approx(1.0));
  }

  TEST_CASE("diag(3, -1)") {
    ComplexMatrix a = ComplexMatrix::Zero(2, 2);
    a(0, 0) = 3.0;
    a(1, 1) = -1.0;
    const auto h = HermitianMatrix::from_lower(a);
    CHECK(min_eigenvalue(h) == doctest::Approx(-1.0));
    CHECK(max_eigenvalue(h) == doctest::Approx(3.0));
  }

  TEST_CASE("random Hermitian 3x3 matches the characteristic-polynomial roots") {
    std::mt19937_64 rng(51);
    for (int t = 0; t < 500; ++t) {
      const ComplexMatrix b = random_complex(rng, 3, 3);
      const ComplexMatrix a = b + b.adjoint();
      const auto roots = oracles::hermitian3_eigenvalues(a);
      const auto h = HermitianMatrix::from_lower(a);
      CHECK(std::abs(min_eigenvalue(h) - roots.front()) <= 1e-8);
      CHECK(std::abs(max_eigenvalue(h) - roots.back()) <= 1e-8);
    }
  }

  TEST_CASE("Hermitian storage is exactly conjugate-symmetric") {
    std::mt19937_64 rng(52);
    const ComplexMatrix a = random_complex(rng, 4, 4);  // not Hermitian on purpose
    const ComplexMatrix d = HermitianMatrix::from_lower(a).dense();
    CHECK(d == d.adjoint());
    CHECK(HermitianMatrix::from_lower(a)(0, 1) == std::conj(a(1, 0)));
  }
}

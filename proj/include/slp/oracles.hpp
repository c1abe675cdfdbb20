#pragma once

// Independent reference computations used to check the production solvers.
// Each takes a different route from the code it checks: a first-order dual
// method, brute-force enumeration, or a closed form.

#include <cstdint>
#include <span>
#include <vector>

#include "slp/numerics/linalg.hpp"
#include "slp/numerics/qp.hpp"

namespace slp::oracles {

using numerics::ComplexMatrix;
using numerics::RealMatrix;
using numerics::RealVector;

/// Min-norm point by enumerating every inequality subset and solving each
/// equality system with a complete orthogonal decomposition. Returns
/// +infinity power (empty x) when no candidate is feasible.
struct QpOracleResult {
  RealVector x;
  double power = 0.0;
};
QpOracleResult enumerate_qp(const numerics::RealConstraintSystem& system);

/// Minimum ||x||^2 with angle(h_j x) = phases[j] and |h_j x| >= amplitudes[j],
/// by accelerated projected gradient on the Lagrange dual, restarted from
/// `restarts` random dual points; returns the best primal power found.
double rays_projected_gradient(const ComplexMatrix& h, std::span<const double> phases,
                               std::span<const double> amplitudes, std::uint64_t seed,
                               int restarts = 3);

/// Minimum power over a uniform per-user offset grid with `points` nodes in
/// [-margin, margin], each node solved by enumerate_qp. Nodes related by a
/// common shift are visited once.
double relaxed_fine_grid(const ComplexMatrix& h, std::span<const double> symbol_phases,
                         std::span<const double> amplitudes, double margin, int points);

/// min sum p s.t. F p >= g, p >= 0 by enumerating every basic solution
/// (all K-subsets of the 2K constraints). Returns +infinity if none is feasible.
struct LpOracleResult {
  RealVector p;
  double total = 0.0;
};
LpOracleResult enumerate_lp(const RealMatrix& f, const RealVector& g);

/// Two-user multicast dual max zeta.lambda s.t. sum lambda_j h_j^H h_j <= I
/// by a dense search over the direction of lambda (the boundary point in each
/// direction is exact) followed by golden-section refinement.
double multicast_dual_grid(const ComplexMatrix& h, std::span<const double> zeta);

/// Exact M-PSK symbol error probability at per-symbol SNR `snr` (linear),
/// by numerical quadrature of Craig's integral.
double psk_ser(int order, double snr);

/// Gaussian tail Q(x).
double gaussian_q(double x);

/// Eigenvalues of a 3x3 Hermitian matrix from the roots of its
/// characteristic polynomial (trigonometric form), ascending.
std::vector<double> hermitian3_eigenvalues(const ComplexMatrix& a);

}  // namespace slp::oracles

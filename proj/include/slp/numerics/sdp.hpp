#pragma once

#include <optional>

#include "slp/numerics/linalg.hpp"

namespace slp::numerics {

struct SdpDualOptions {
  int max_iterations = 20000;
  /// Any nonnegative starting multipliers; rescaled onto the feasible set.
  std::optional<RealVector> warm_start;
};

struct SdpDualResult {
  RealVector lambda;   // feasible: lambda >= 0, I - sum lambda_j h_j^H h_j is PSD
  double value = 0.0;  // sum lambda_j zeta_j, a lower bound on min tr(Q)
  int iterations = 0;
};

/// Dual of the multicast covariance problem
///   min tr(Q)  s.t.  h_j Q h_j^H >= zeta_j,  Q PSD
/// which reads  max zeta.lambda  s.t.  sum_j lambda_j h_j^H h_j <= I,  lambda >= 0.
///
/// The objective is homogeneous along rays, so the search runs over
/// directions w on the probability simplex (lambda_j ~ w_j / zeta_j) and
/// minimizes the largest eigenvalue of sum_j (w_j/zeta_j) h_j^H h_j. Projected
/// gradient descent with Armijo backtracking is applied to a log-sum-exp
/// smoothing of that eigenvalue, with the smoothing width driven to zero.
/// Every iterate is repaired to exact feasibility by dividing by the largest
/// eigenvalue, so the reported value is always a valid lower bound.
///
/// `channels` holds one user channel h_j per row. Users with zeta_j == 0 get
/// lambda_j == 0. Throws DegenerateInput for a zero channel and SolverFailure
/// (carrying the best dual value) when the iteration cap is hit while still
/// making progress.
SdpDualResult sdp_multicast_dual(const ComplexMatrix& channels, const RealVector& zeta,
                                 const SdpDualOptions& options = {});

/// Projection of v onto the probability simplex {w >= 0, sum w = 1}.
RealVector project_to_simplex(const RealVector& v);

}  // namespace slp::numerics

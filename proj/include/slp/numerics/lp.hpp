#pragma once

#include "slp/numerics/linalg.hpp"

namespace slp::numerics {

struct LpSolution {
  RealVector p;       // primal minimizer, p >= 0
  RealVector dual;    // y >= 0 with F^T y <= 1 and g.y == total at optimum
  double total = 0.0; // sum of p
};

/// min sum(p)  s.t.  F p >= g,  p >= 0   for a square nonnegative F and g >= 0.
///
/// Solved as its dual, max g.y s.t. F^T y <= 1, y >= 0, whose slack basis is
/// feasible from the start, by a dense tableau simplex with Bland's rule.
/// The primal p is read off the reduced costs of the slack columns. An
/// unbounded dual (a user with no coupling and g > 0) raises InfeasibleError.
LpSolution lp_min_sum(const RealMatrix& f, const RealVector& g);

}  // namespace slp::numerics

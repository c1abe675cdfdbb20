#pragma once

#include <complex>
#include <vector>

#include "slp/numerics/linalg.hpp"

namespace slp::modulation {

using numerics::Complex;

/// One M-PSK constellation point. Points sit at exp(i(2 pi m / M + pi / M)),
/// so QPSK occupies the odd multiples of pi/4 and BPSK sits at +-pi/2.
struct PskSymbol {
  int order = 4;
  int index = 0;
  Complex value{1.0, 0.0};

  double phase() const;
};

/// Throws std::invalid_argument unless order >= 2 is a power of two.
void check_order(int order);

/// Throws std::out_of_range for index outside [0, order).
PskSymbol modulate(int index, int order);

/// Centre phase of constellation point `index`, in [0, 2 pi).
double constellation_phase(int index, int order);

/// Bits per symbol, log2(order).
double bits_per_symbol(int order);

struct Detection {
  int index = 0;
  bool degenerate = false;  // y == 0; index is then 0
};

/// Minimum-distance (sector) detection. The sector of point m is
/// [2 pi m / M, 2 pi (m + 1) / M); a phase exactly on a sector edge goes to
/// the lower of the two indices.
Detection detect(Complex y, int order);

/// Relaxed detection region around a point: centre phase, half-width pi/M
/// and the admissible relaxation margins below (phi1) and above (phi2).
struct DetectionRegion {
  double center = 0.0;
  double half_width = 0.0;
  double margin_below = 0.0;
  double margin_above = 0.0;

  static DetectionRegion of(const PskSymbol& symbol, double margin_below = 0.0,
                            double margin_above = 0.0);
  bool admits_phase(double phase) const;  // within [center - phi1, center + phi2]
};

/// psi_jk = h_j w_k / (|h_j| |w_k|). Throws DegenerateInput on a zero vector.
Complex interference_coefficient(const numerics::ComplexRow& h_j,
                                 const numerics::ComplexVector& w_k);

struct InterferenceClass {
  bool phase_condition = false;  // angle(psi d_k) within +-pi/M of angle(d_j)
  bool sign_condition = false;   // Re d_k Re(psi d_j) > 0 and Im d_k Im(psi d_j) > 0
  bool neutral = false;          // psi == 0 or a sign product is exactly zero
  bool constructive = false;     // both conditions
};

/// Constructive/destructive classification of the interference psi_jk
/// between symbols d_j and d_k. The phase condition is evaluated as an
/// angular distance on the full circle. Components below 1e-12 count as
/// zero, so the sign products of axis-aligned points (BPSK) are zero and the
/// pair is reported neutral, not constructive.
InterferenceClass classify(Complex psi, const PskSymbol& d_j, const PskSymbol& d_k);

bool is_constructive(Complex psi, const PskSymbol& d_j, const PskSymbol& d_k);

/// Wraps an angle to (-pi, pi].
double wrap_phase(double angle);

}  // namespace slp::modulation

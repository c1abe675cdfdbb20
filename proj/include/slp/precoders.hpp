#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "slp/modulation.hpp"
#include "slp/numerics/linalg.hpp"

namespace slp::precoders {

using numerics::Complex;
using numerics::ComplexMatrix;
using numerics::ComplexVector;
using numerics::HermitianMatrix;
using numerics::RealVector;

/// Per-user SNR targets zeta_j (linear) and the receiver noise variance.
/// The amplitude floor of user j is sqrt(noise_variance * zeta_j).
struct SnrTargets {
  std::vector<double> zeta;
  double noise_variance = 1.0;

  static SnrTargets uniform(std::size_t users, double zeta, double noise_variance = 1.0);
  double amplitude(std::size_t user) const;
  void validate(std::size_t users) const;
};

/// The data symbols of one symbol period, one per user, sharing one order.
struct SymbolVector {
  int order = 4;
  std::vector<int> indices;

  static SymbolVector from_indices(std::vector<int> indices, int order);
  std::size_t size() const { return indices.size(); }
  modulation::PskSymbol operator[](std::size_t user) const;
  double phase(std::size_t user) const;
  ComplexVector values() const;
  void validate() const;
};

/// Admissible received-phase offsets: user j may be received anywhere in
/// [angle(d_j) - margin_below[j], angle(d_j) + margin_above[j]]. The search
/// uses `grid_points` (odd) nodes per user.
struct RelaxationConfig {
  std::vector<double> margin_below;
  std::vector<double> margin_above;
  int grid_points = 41;

  static RelaxationConfig uniform(std::size_t users, double margin, int grid_points = 41);
  static RelaxationConfig none(std::size_t users);
  void validate(std::size_t users, int order) const;
  bool is_zero() const;
};

enum class Method { Cipm, Cipmr, Zf, Mmse, Cizf };

std::string_view method_name(Method method);

/// Lagrange data for the relaxed problem written in each user's rotated
/// frame z_j = exp(-i(angle d_j + offset_j)) h_j x:
///   alpha_j >= 0  amplitude constraint  Re z_j >= sqrt(sigma^2 zeta_j)
///   mu_j          phase constraint      Im z_j == 0
///   lambda_j >= 0 offset_j >= -margin_below_j
///   gamma_j >= 0  offset_j <=  margin_above_j
/// Stationarity: x = 1/2 sum_j (alpha_j + i mu_j) exp(i(angle d_j + offset_j)) h_j^H
/// and mu_j Re z_j - lambda_j + gamma_j == 0. u_j = cos(offset_j).
struct DualCertificate {
  std::vector<double> alpha, mu, lambda, gamma, u, offset;
};

struct PrecoderOutput {
  Method method = Method::Cipm;
  ComplexVector x;
  ComplexVector received;             // h_j x
  double power = 0.0;                 // ||x||^2
  std::vector<double> phase_offsets;  // angle(h_j x) - angle(d_j), wrapped
  std::optional<DualCertificate> certificate;
};

/// Fills received phasors, power and achieved offsets from (H, d, x).
PrecoderOutput make_output(Method method, const ComplexMatrix& h, const SymbolVector& d,
                           ComplexVector x);

/// Minimum-power x with every h_j x on the ray at angle `phases[j]` and
/// |h_j x| >= amplitudes[j]. Shared core of CIPM, CIPMR and the multicast
/// primal. Multipliers follow DualCertificate (alpha, mu).
struct RaySolution {
  ComplexVector x;
  double power = 0.0;
  std::vector<double> alpha, mu;
};

RaySolution min_power_on_rays(const ComplexMatrix& h, std::span<const double> phases,
                              std::span<const double> amplitudes);

/// Strict-constellation precoder: angle(h_j x) == angle(d_j) and
/// |h_j x|^2 >= sigma^2 zeta_j, minimum ||x||^2.
PrecoderOutput cipm(const ComplexMatrix& h, const SymbolVector& d, const SnrTargets& targets);

/// CIPM with user j's target phase rotated by offsets[j].
PrecoderOutput cipmr_subproblem(const ComplexMatrix& h, const SymbolVector& d,
                                const SnrTargets& targets, std::span<const double> offsets);

/// Same offset for every user. This is a global rotation of the CIPM point
/// and therefore never changes the power.
PrecoderOutput cipmr_subproblem(const ComplexMatrix& h, const SymbolVector& d,
                                const SnrTargets& targets, double offset);

struct GridSearchResult {
  PrecoderOutput output;
  std::vector<double> offsets;  // phi*, one per user
  int evaluated = 0;
  int infeasible = 0;
};

/// Relaxed-region precoder by linear search over per-user received phase
/// offsets: every node of the per-user grid (with the all-zero node always
/// included) is solved as a cipmr_subproblem, and the cheapest node is then
/// polished by a bounded compass search. Nodes that differ only by a common
/// shift have equal power, so with identical user boxes only nodes touching
/// the lower edge are visited. Infeasible nodes are skipped.
///
/// With all margins zero this is exactly cipm (same solver path).
/// Throws InfeasibleError when no node is feasible.
GridSearchResult cipmr_grid(const ComplexMatrix& h, const SymbolVector& d,
                            const SnrTargets& targets, const RelaxationConfig& relax);

struct KktReport {
  double stationarity_x = 0.0;      // ||x - 1/2 sum ...|| / max(1, ||x||)
  double stationarity_phase = 0.0;  // max |mu_j Re z_j - lambda_j + gamma_j|
  double primal_feasibility = 0.0;
  double dual_feasibility = 0.0;    // max negative part of alpha, lambda, gamma
  double complementarity = 0.0;
  double u_consistency = 0.0;       // max |u_j - cos(offset_j)|

  double worst() const;
  bool accepted(double tol = 1e-6) const { return worst() <= tol; }
};

KktReport kkt_residual(const PrecoderOutput& output, const DualCertificate& cert,
                       const ComplexMatrix& h, const SymbolVector& d,
                       const SnrTargets& targets, const RelaxationConfig& relax);

/// Decomposition behind the genie-aided bound with W = H' (unit-norm
/// matched-filter columns h_j^H/|h_j|): thin SVD H = U S V^H, G = U S,
/// B = V^H W, so that H W = G B. xi_jk = g_j b_k / |g_j| and
/// rho_jk = h_j h_k^H / (|h_j| |h_k|).
struct GenieDecomposition {
  ComplexMatrix g, b, xi, rho;
};

GenieDecomposition genie_decomposition(const ComplexMatrix& h);

struct GenieBound {
  RealVector p;
  double total = 0.0;
};

/// min sum p_k s.t. |g_k|^2 (|xi_kk|^2 p_k + sum_{j != k} |xi_kj|^2 p_j) >= zeta_k.
/// zeta is noise-normalized (sigma^2 = 1).
GenieBound genie_min_power(const ComplexMatrix& h, std::span<const double> zeta);

struct MulticastBound {
  HermitianMatrix q;
  double total = 0.0;       // tr(Q)
  double dual_value = 0.0;  // certified lower bound
  double gap = 0.0;         // |total - dual| / max(1, dual)
  RealVector lambda;
  int rank = 0;
  std::optional<ComplexVector> beamformer;  // set when Q has rank one
};

/// min tr(Q) s.t. h_j Q h_j^H >= zeta_j, Q PSD (zeta noise-normalized).
/// The dual is solved by numerics::sdp_multicast_dual; a rank-one primal is
/// recovered from the dual's top eigenvector and polished by a phase search
/// over min_power_on_rays, with a null-space combination as a higher-rank
/// fallback. Throws SolverFailure (carrying the dual bound) if the gap
/// stays above 1e-4.
MulticastBound multicast_min_power(const ComplexMatrix& h, std::span<const double> zeta);

/// x = H^+ diag(sqrt(sigma^2 zeta)) d. Requires K <= M and full row rank.
PrecoderOutput zf_precoder(const ComplexMatrix& h, const SymbolVector& d,
                           const SnrTargets& targets);

struct MmseOptions {
  double reference_power = 1.0;  // P_ref in the regularizer sigma^2 K / P_ref
};

/// x = c H^H (H H^H + sigma^2 K / P_ref I)^-1 diag(sqrt(sigma^2 zeta)) d, with
/// the common scale c the smallest that puts every user's own-stream
/// component at its amplitude floor.
PrecoderOutput mmse_precoder(const ComplexMatrix& h, const SymbolVector& d,
                             const SnrTargets& targets, const MmseOptions& options = {});

/// Constructive-interference zero forcing, reduced-fidelity reconstruction.
/// Starts from the matched-filter crosstalk R = H H^H, drops the off-diagonal
/// terms that the current symbols make destructive, and transmits
/// x = beta H^+ R_c d so that users receive R_c d: own signal plus constructive
/// crosstalk only. beta is the smallest scale meeting every in-phase
/// amplitude floor.
PrecoderOutput cizf_precoder(const ComplexMatrix& h, const SymbolVector& d,
                             const SnrTargets& targets);

}  // namespace slp::precoders

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "phase_search.hpp"
#include "slp/errors.hpp"
#include "slp/numerics/lp.hpp"
#include "slp/numerics/sdp.hpp"
#include "slp/precoders.hpp"

namespace slp::precoders {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGapTolerance = 1e-4;

void check_channels(const ComplexMatrix& h, std::span<const double> zeta) {
  if (h.rows() < 1 || h.cols() < 1) throw std::invalid_argument("channel matrix is empty");
  if (!numerics::all_finite(h)) throw std::invalid_argument("channel matrix has non-finite entries");
  if (static_cast<Eigen::Index>(zeta.size()) != h.rows()) {
    throw std::invalid_argument("one zeta per user required");
  }
  for (double z : zeta) {
    if (!(z >= 0.0) || !std::isfinite(z)) throw std::invalid_argument("zeta must be finite and >= 0");
  }
}

struct Candidate {
  ComplexMatrix q;  // dense PSD covariance
  double trace = std::numeric_limits<double>::infinity();
  std::optional<ComplexVector> beam;
};

// Feasible up to the documented 1e-8 relative slack.
bool covariance_feasible(const ComplexMatrix& h, const ComplexMatrix& q,
                         std::span<const double> zeta) {
  for (Eigen::Index j = 0; j < h.rows(); ++j) {
    const double got = (h.row(j) * q * h.row(j).adjoint())(0).real();
    if (got < zeta[static_cast<std::size_t>(j)] * (1.0 - 1e-8)) return false;
  }
  return true;
}

// Rank-one candidate along v, scaled to meet the tightest user exactly.
std::optional<ComplexVector> scaled_beam(const ComplexMatrix& h, const ComplexVector& v,
                                         std::span<const double> zeta) {
  double tau = 0.0;
  for (Eigen::Index j = 0; j < h.rows(); ++j) {
    const double z = zeta[static_cast<std::size_t>(j)];
    if (z == 0.0) continue;
    const double g = std::norm((h.row(j) * v)(0));
    if (g == 0.0) return std::nullopt;
    tau = std::max(tau, z / g);
  }
  return v * std::sqrt(tau);
}

// Locally optimal beamformer given only received phases: the fixed-phase
// min-norm program, searched over all users' phases.
ComplexVector polish_beam(const ComplexMatrix& h, const ComplexVector& x0,
                          std::span<const double> amplitudes) {
  const std::size_t k = amplitudes.size();
  std::vector<double> phases(k);
  for (std::size_t j = 0; j < k; ++j) {
    const Complex r = (h.row(static_cast<Eigen::Index>(j)) * x0)(0);
    phases[j] = r == Complex(0.0, 0.0) ? 0.0 : std::arg(r);
  }
  auto power_at = [&](const std::vector<double>& p) -> std::optional<double> {
    try {
      return min_power_on_rays(h, p, amplitudes).power;
    } catch (const InfeasibleError&) {
      return std::nullopt;
    }
  };
  const std::optional<double> start = power_at(phases);
  if (!start) return x0;
  const std::vector<double> lower(k, -std::numeric_limits<double>::infinity());
  const std::vector<double> upper(k, std::numeric_limits<double>::infinity());
  const detail::PhaseSearchResult r =
      detail::compass_search(power_at, phases, *start, lower, upper, kPi / 8.0, 1e-12);
  return min_power_on_rays(h, r.phases, amplitudes).x;
}

// Dual multipliers implied by a stationary rank-one primal x: solve
// x = sum_j lambda_j h_j^H (h_j x) in least squares over the real lambda.
std::optional<numerics::RealVector> multipliers_from_beam(const ComplexMatrix& h,
                                                          const ComplexVector& x) {
  const Eigen::Index k = h.rows();
  const Eigen::Index m = h.cols();
  numerics::RealMatrix a(2 * m, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const ComplexVector col = h.row(j).adjoint() * (h.row(j) * x)(0);
    a.col(j).head(m) = col.real();
    a.col(j).tail(m) = col.imag();
  }
  numerics::RealVector b(2 * m);
  b.head(m) = x.real();
  b.tail(m) = x.imag();
  numerics::RealVector lambda = a.completeOrthogonalDecomposition().solve(b);
  if (!lambda.allFinite()) return std::nullopt;
  return lambda.cwiseMax(0.0);
}

ComplexMatrix weighted_gram(const ComplexMatrix& h, const numerics::RealVector& lambda) {
  ComplexMatrix s = ComplexMatrix::Zero(h.cols(), h.cols());
  for (Eigen::Index j = 0; j < h.rows(); ++j) {
    if (lambda(j) > 0.0) s.noalias() += lambda(j) * h.row(j).adjoint() * h.row(j);
  }
  return s;
}

// Q supported on the eigenspace of sum lambda_j h_j^H h_j at eigenvalue 1,
// built as a nonnegative mix of the projected channels.
std::optional<Candidate> null_space_candidate(const ComplexMatrix& h,
                                              const numerics::RealVector& lambda,
                                              std::span<const double> zeta) {
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(weighted_gram(h, lambda));
  const numerics::RealVector& e = es.eigenvalues();
  const double top = e.maxCoeff();
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    if (e(i) >= top - 1e-6 * std::max(1.0, top)) cols.push_back(i);
  }
  ComplexMatrix basis(h.cols(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    basis.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(cols[c]);
  }
  const Eigen::Index k = h.rows();
  std::vector<ComplexVector> dirs;
  for (Eigen::Index j = 0; j < k; ++j) dirs.push_back(basis * (basis.adjoint() * h.row(j).adjoint()));

  numerics::RealMatrix f(k, k);
  numerics::RealVector g(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    g(j) = zeta[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < k; ++i) f(j, i) = std::norm((h.row(j) * dirs[i])(0));
  }
  numerics::LpSolution lp;
  try {
    lp = numerics::lp_min_sum(f, g);
  } catch (const Error&) {
    return std::nullopt;
  }
  Candidate c;
  c.q = ComplexMatrix::Zero(h.cols(), h.cols());
  for (Eigen::Index i = 0; i < k; ++i) {
    if (lp.p(i) > 0.0) c.q.noalias() += lp.p(i) * dirs[i] * dirs[i].adjoint();
  }
  c.trace = c.q.trace().real();
  return c;
}

}  // namespace

GenieDecomposition genie_decomposition(const ComplexMatrix& h) {
  if (h.rows() < 1 || h.cols() < 1 || !numerics::all_finite(h)) {
    throw std::invalid_argument("genie_decomposition: finite non-empty channel required");
  }
  const Eigen::Index k = h.rows();
  const numerics::SvdResult f = numerics::svd(h);
  const int rank = numerics::numerical_rank(f.singular_values, 1e-10);
  if (rank < k) throw RankError("genie_decomposition: channel matrix is rank deficient", rank);

  ComplexMatrix w(h.cols(), k);
  for (Eigen::Index j = 0; j < k; ++j) w.col(j) = h.row(j).adjoint() / h.row(j).norm();

  GenieDecomposition out;
  out.g = f.u * f.singular_values.cast<Complex>().asDiagonal();
  out.b = f.v.adjoint() * w;
  out.xi.resize(k, k);
  out.rho.resize(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double gn = out.g.row(j).norm();
    for (Eigen::Index i = 0; i < k; ++i) {
      out.xi(j, i) = (out.g.row(j) * out.b.col(i))(0) / gn;
      out.rho(j, i) = (h.row(j) * h.row(i).adjoint())(0) / (h.row(j).norm() * h.row(i).norm());
    }
    out.rho(j, j) = 1.0;
  }
  return out;
}

GenieBound genie_min_power(const ComplexMatrix& h, std::span<const double> zeta) {
  check_channels(h, zeta);
  const GenieDecomposition dec = genie_decomposition(h);
  const Eigen::Index k = h.rows();
  numerics::RealMatrix f(k, k);
  numerics::RealVector g(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    const double gain = dec.g.row(r).squaredNorm();
    for (Eigen::Index c = 0; c < k; ++c) f(r, c) = gain * std::norm(dec.xi(r, c));
    g(r) = zeta[static_cast<std::size_t>(r)];
  }
  const numerics::LpSolution lp = numerics::lp_min_sum(f, g);
  return {lp.p, lp.total};
}

MulticastBound multicast_min_power(const ComplexMatrix& h, std::span<const double> zeta) {
  check_channels(h, zeta);
  const Eigen::Index k = h.rows();
  const Eigen::Index m = h.cols();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (h.row(j).squaredNorm() == 0.0) {
      throw DegenerateInput("multicast_min_power: zero channel for user " + std::to_string(j));
    }
  }
  const numerics::RealVector zv =
      Eigen::Map<const numerics::RealVector>(zeta.data(), static_cast<Eigen::Index>(zeta.size()));
  std::vector<double> amplitudes(zeta.begin(), zeta.end());
  for (double& a : amplitudes) a = std::sqrt(a);

  MulticastBound out;
  if ((zv.array() == 0.0).all()) {
    out.q = HermitianMatrix(m);
    out.lambda = numerics::RealVector::Zero(k);
    out.beamformer = ComplexVector::Zero(m);
    out.rank = 0;
    return out;
  }

  Candidate best;
  auto consider = [&](Candidate c) {
    if (c.trace < best.trace && covariance_feasible(h, c.q, zeta)) best = std::move(c);
  };
  auto consider_beam = [&](const ComplexVector& x) {
    Candidate c;
    c.q = x * x.adjoint();
    c.trace = x.squaredNorm();
    c.beam = x;
    consider(std::move(c));
  };
  auto beam_from = [&](const numerics::RealVector& lambda) -> std::optional<ComplexVector> {
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(weighted_gram(h, lambda));
    const ComplexVector v = es.eigenvectors().col(m - 1);
    const std::optional<ComplexVector> x = scaled_beam(h, v, zeta);
    if (!x) return std::nullopt;
    consider_beam(*x);
    return polish_beam(h, *x, amplitudes);
  };

  // Primal first from the cheap default direction; its stationarity
  // conditions give a near-optimal warm start for the dual.
  numerics::RealVector init(k);
  for (Eigen::Index j = 0; j < k; ++j) init(j) = zv(j) / h.row(j).squaredNorm();
  std::optional<numerics::RealVector> warm;
  if (auto x = beam_from(init)) {
    consider_beam(*x);
    warm = multipliers_from_beam(h, *x);
  }

  numerics::SdpDualResult dual;
  try {
    numerics::SdpDualOptions opts;
    opts.warm_start = warm;
    dual = numerics::sdp_multicast_dual(h, zv, opts);
  } catch (const SolverFailure& e) {
    throw SolverFailure(std::string("multicast_min_power: ") + e.what(), e.value());
  }

  auto gap_of = [&](double total) {
    return std::abs(total - dual.value) / std::max(1.0, dual.value);
  };
  if (gap_of(best.trace) > 1e-9) {
    if (auto x = beam_from(dual.lambda)) consider_beam(*x);
  }
  if (gap_of(best.trace) > 1e-9) {
    if (auto c = null_space_candidate(h, dual.lambda, zeta)) consider(std::move(*c));
  }
  if (!std::isfinite(best.trace) || gap_of(best.trace) > kGapTolerance) {
    throw SolverFailure("multicast_min_power: duality gap above tolerance", dual.value);
  }

  out.q = HermitianMatrix::from_lower(best.q);
  out.total = out.q.trace();
  out.dual_value = dual.value;
  out.gap = gap_of(out.total);
  out.lambda = dual.lambda;
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(out.q.dense(), Eigen::EigenvaluesOnly);
  const numerics::RealVector e = es.eigenvalues().reverse();
  out.rank = numerics::numerical_rank(e.cwiseMax(0.0), 1e-8);
  if (out.rank <= 1) out.beamformer = best.beam;
  return out;
}

}  // namespace slp::precoders

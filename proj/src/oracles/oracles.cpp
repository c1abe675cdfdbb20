#include "slp/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace slp::oracles {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

numerics::RealConstraintSystem rays_system(const ComplexMatrix& h, std::span<const double> phases,
                                           std::span<const double> amplitudes) {
  const Eigen::Index k = h.rows();
  const Eigen::Index m = h.cols();
  auto sys = numerics::RealConstraintSystem::with_variables(2 * m);
  sys.eq_matrix.resize(k, 2 * m);
  sys.eq_rhs = RealVector::Zero(k);
  sys.ineq_matrix.resize(k, 2 * m);
  sys.ineq_rhs.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double c = std::cos(phases[static_cast<std::size_t>(j)]);
    const double s = std::sin(phases[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < m; ++i) {
      // e^{-i phase} h_ji
      const double re = c * h(j, i).real() + s * h(j, i).imag();
      const double im = c * h(j, i).imag() - s * h(j, i).real();
      sys.eq_matrix(j, i) = im;
      sys.eq_matrix(j, m + i) = re;
      sys.ineq_matrix(j, i) = re;
      sys.ineq_matrix(j, m + i) = -im;
    }
    sys.ineq_rhs(j) = amplitudes[static_cast<std::size_t>(j)];
  }
  return sys;
}

double largest_eigenvalue(const ComplexMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

QpOracleResult enumerate_qp(const numerics::RealConstraintSystem& system) {
  const Eigen::Index n = system.variables();
  const Eigen::Index ne = system.eq_matrix.rows();
  const Eigen::Index ni = system.ineq_matrix.rows();
  if (ni > 20) throw std::invalid_argument("enumerate_qp: too many inequalities");
  const double scale = std::max({1.0, system.eq_rhs.size() ? system.eq_rhs.cwiseAbs().maxCoeff() : 0.0,
                                 system.ineq_rhs.size() ? system.ineq_rhs.cwiseAbs().maxCoeff() : 0.0});
  const double tol = 1e-9 * scale;

  QpOracleResult best;
  best.power = kInf;
  for (std::uint32_t mask = 0; mask < (1u << ni); ++mask) {
    const int active = std::popcount(mask);
    RealMatrix a(ne + active, n);
    RealVector b(ne + active);
    a.topRows(ne) = system.eq_matrix;
    b.head(ne) = system.eq_rhs;
    Eigen::Index r = ne;
    for (Eigen::Index i = 0; i < ni; ++i) {
      if (mask & (1u << i)) {
        a.row(r) = system.ineq_matrix.row(i);
        b(r++) = system.ineq_rhs(i);
      }
    }
    RealVector x = RealVector::Zero(n);
    if (a.rows() > 0) x = a.completeOrthogonalDecomposition().solve(b);
    if (a.rows() > 0 && (a * x - b).cwiseAbs().maxCoeff() > tol) continue;
    if (ni > 0 && (system.ineq_matrix * x - system.ineq_rhs).minCoeff() < -tol) continue;
    const double p = x.squaredNorm();
    if (p < best.power) {
      best.power = p;
      best.x = x;
    }
  }
  return best;
}

double rays_projected_gradient(const ComplexMatrix& h, std::span<const double> phases,
                               std::span<const double> amplitudes, std::uint64_t seed,
                               int restarts) {
  const auto sys = rays_system(h, phases, amplitudes);
  const Eigen::Index k = h.rows();
  RealMatrix a(2 * k, sys.variables());
  a.topRows(k) = sys.eq_matrix;
  a.bottomRows(k) = sys.ineq_matrix;
  RealVector b = RealVector::Zero(2 * k);
  b.tail(k) = sys.ineq_rhs;

  // Dual of min ||xi||^2 s.t. A_eq xi = 0, A_in xi >= b:
  //   max_nu  -1/4 ||A^T nu||^2 + b.nu,  nu_in >= 0,  xi = A^T nu / 2.
  const double lipschitz = 0.5 * a.operatorNorm() * a.operatorNorm();
  const RealMatrix gram = a * a.transpose();
  auto project = [&](RealVector v) {
    v.tail(k) = v.tail(k).cwiseMax(0.0);
    return v;
  };
  auto dual = [&](const RealVector& nu) {
    return -0.25 * nu.dot(gram * nu) + b.dot(nu);
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double best = -kInf;
  for (int rs = 0; rs < std::max(1, restarts); ++rs) {
    RealVector nu(2 * k);
    for (Eigen::Index i = 0; i < nu.size(); ++i) nu(i) = rs == 0 ? 0.0 : normal(rng);
    nu = project(nu);
    RealVector y = nu;
    double t = 1.0;
    double prev = dual(nu);
    for (int it = 0; it < 400000; ++it) {
      const RealVector grad = -0.5 * (gram * y) + b;
      const RealVector next = project(y + grad / lipschitz);
      const double value = dual(next);
      if (value < prev) {  // adaptive restart of the momentum
        t = 1.0;
        y = nu;
        continue;
      }
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = next + ((t - 1.0) / t_next) * (next - nu);
      const double step = (next - nu).norm();
      nu = next;
      t = t_next;
      const double gain = value - prev;
      prev = value;
      if (step <= 1e-14 * (1.0 + nu.norm()) && gain <= 1e-15 * (1.0 + std::abs(value))) break;
    }
    best = std::max(best, prev);
  }
  return best;
}

double relaxed_fine_grid(const ComplexMatrix& h, std::span<const double> symbol_phases,
                         std::span<const double> amplitudes, double margin, int points) {
  const std::size_t k = symbol_phases.size();
  std::vector<double> phases(symbol_phases.begin(), symbol_phases.end());
  double best = enumerate_qp(rays_system(h, phases, amplitudes)).power;
  if (margin == 0.0 || points < 2) return best;
  const double spacing = 2.0 * margin / (points - 1);
  std::vector<int> idx(k, 0);
  for (;;) {
    if (std::find(idx.begin(), idx.end(), 0) != idx.end()) {
      for (std::size_t j = 0; j < k; ++j) phases[j] = symbol_phases[j] - margin + spacing * idx[j];
      best = std::min(best, enumerate_qp(rays_system(h, phases, amplitudes)).power);
    }
    std::size_t j = 0;
    while (j < k && ++idx[j] == points) idx[j++] = 0;
    if (j == k) break;
  }
  return best;
}

LpOracleResult enumerate_lp(const RealMatrix& f, const RealVector& g) {
  const Eigen::Index k = f.rows();
  if (f.cols() != k || g.size() != k) throw std::invalid_argument("enumerate_lp: size mismatch");
  RealMatrix rows(2 * k, k);
  RealVector rhs(2 * k);
  rows.topRows(k) = f;
  rhs.head(k) = g;
  rows.bottomRows(k) = RealMatrix::Identity(k, k);
  rhs.tail(k).setZero();
  const double tol = 1e-9 * std::max(1.0, g.size() ? g.maxCoeff() : 0.0);

  LpOracleResult best;
  best.total = kInf;
  std::vector<bool> pick(static_cast<std::size_t>(2 * k), false);
  std::fill(pick.begin(), pick.begin() + k, true);
  do {
    RealMatrix a(k, k);
    RealVector b(k);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < 2 * k; ++i) {
      if (pick[static_cast<std::size_t>(i)]) {
        a.row(r) = rows.row(i);
        b(r++) = rhs(i);
      }
    }
    const Eigen::FullPivLU<RealMatrix> lu(a);
    if (!lu.isInvertible()) continue;
    const RealVector p = lu.solve(b);
    if ((rows * p - rhs).minCoeff() < -tol) continue;
    if (p.sum() < best.total) {
      best.total = p.sum();
      best.p = p;
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

double multicast_dual_grid(const ComplexMatrix& h, std::span<const double> zeta) {
  if (h.rows() != 2 || zeta.size() != 2) throw std::invalid_argument("multicast_dual_grid: K = 2 only");
  const ComplexMatrix a1 = h.row(0).adjoint() * h.row(0);
  const ComplexMatrix a2 = h.row(1).adjoint() * h.row(1);
  auto value = [&](double t) {
    const double w1 = std::cos(t);
    const double w2 = std::sin(t);
    const double top = largest_eigenvalue(w1 * a1 + w2 * a2);
    return (zeta[0] * w1 + zeta[1] * w2) / top;
  };
  const int n = 20000;
  int best_i = 0;
  double best = -kInf;
  for (int i = 0; i <= n; ++i) {
    const double v = value(0.5 * kPi * i / n);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  double lo = 0.5 * kPi * std::max(0, best_i - 1) / n;
  double hi = 0.5 * kPi * std::min(n, best_i + 1) / n;
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double c = hi - ratio * (hi - lo);
    const double d = lo + ratio * (hi - lo);
    if (value(c) >= value(d)) {
      hi = d;
    } else {
      lo = c;
    }
  }
  return std::max(best, value(0.5 * (lo + hi)));
}

double gaussian_q(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double psk_ser(int order, double snr) {
  if (order < 2) throw std::invalid_argument("psk_ser: order >= 2");
  const double s = std::sin(kPi / order);
  const double upper = kPi - kPi / order;
  auto integrand = [&](double theta) {
    const double st = std::sin(theta);
    if (st == 0.0) return 0.0;
    return std::exp(-snr * s * s / (st * st));
  };
  const int n = 200000;  // even, composite Simpson
  const double hstep = upper / n;
  double sum = integrand(0.0) + integrand(upper);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * integrand(i * hstep);
  return sum * hstep / 3.0 / kPi;
}

std::vector<double> hermitian3_eigenvalues(const ComplexMatrix& a) {
  if (a.rows() != 3 || a.cols() != 3) throw std::invalid_argument("hermitian3_eigenvalues: 3x3 only");
  const double p1 = std::norm(a(0, 1)) + std::norm(a(0, 2)) + std::norm(a(1, 2));
  const double q = (a(0, 0).real() + a(1, 1).real() + a(2, 2).real()) / 3.0;
  std::vector<double> e(3);
  if (p1 == 0.0) {
    e = {a(0, 0).real(), a(1, 1).real(), a(2, 2).real()};
    std::sort(e.begin(), e.end());
    return e;
  }
  const double d0 = a(0, 0).real() - q;
  const double d1 = a(1, 1).real() - q;
  const double d2 = a(2, 2).real() - q;
  const double p = std::sqrt((d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1) / 6.0);
  ComplexMatrix b = (a - q * ComplexMatrix::Identity(3, 3)) / p;
  const auto det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                   b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                   b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
  const double r = std::clamp(det.real() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double big = q + 2.0 * p * std::cos(phi);
  const double small = q + 2.0 * p * std::cos(phi + 2.0 * kPi / 3.0);
  e = {small, 3.0 * q - big - small, big};
  std::sort(e.begin(), e.end());
  return e;
}

}  // namespace slp::oracles

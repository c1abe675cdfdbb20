#include "slp/numerics/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "slp/errors.hpp"

namespace slp::numerics {

RealVector project_to_simplex(const RealVector& v) {
  const Eigen::Index n = v.size();
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double shift = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) shift = candidate;
  }
  return (v.array() - shift).cwiseMax(0.0).matrix();
}

namespace {

// Directions live on the simplex over the users with zeta_j > 0. The
// weighted Gram sum M(w) = sum_j (w_j / zeta_j) a_j a_j^H, a_j = h_j^H.
class DualObjective {
 public:
  DualObjective(const ComplexMatrix& channels, const RealVector& zeta, std::vector<int> users)
      : users_(std::move(users)), dim_(channels.cols()) {
    for (int j : users_) {
      columns_.push_back(channels.row(j).adjoint());
      inv_zeta_.push_back(1.0 / zeta(j));
    }
  }

  Eigen::Index size() const { return static_cast<Eigen::Index>(users_.size()); }
  const std::vector<int>& users() const { return users_; }

  ComplexMatrix gram_sum(const RealVector& w) const {
    ComplexMatrix m = ComplexMatrix::Zero(dim_, dim_);
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      const double weight = w(static_cast<Eigen::Index>(j)) * inv_zeta_[j];
      if (weight != 0.0) m.noalias() += weight * columns_[j] * columns_[j].adjoint();
    }
    return m;
  }

  double largest(const RealVector& w) const {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram_sum(w), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
  }

  // log-sum-exp smoothing of the spectrum with width mu.
  double smoothed(const RealVector& w, double mu) const {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram_sum(w), Eigen::EigenvaluesOnly);
    return smooth_max(es.eigenvalues(), mu);
  }

  double smoothed_with_gradient(const RealVector& w, double mu, RealVector& grad) const {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram_sum(w));
    const RealVector& e = es.eigenvalues();
    const double top = e.maxCoeff();
    RealVector weights = ((e.array() - top) / mu).exp();
    weights /= weights.sum();
    grad.resize(size());
    for (Eigen::Index j = 0; j < size(); ++j) {
      const ComplexVector proj = es.eigenvectors().adjoint() * columns_[j];
      grad(j) = (weights.array() * proj.array().abs2()).sum() * inv_zeta_[j];
    }
    return smooth_max(e, mu);
  }

 private:
  static double smooth_max(const RealVector& e, double mu) {
    const double top = e.maxCoeff();
    return top + mu * std::log(((e.array() - top) / mu).exp().sum());
  }

  std::vector<int> users_;
  Eigen::Index dim_;
  std::vector<ComplexVector> columns_;
  std::vector<double> inv_zeta_;
};

}  // namespace

SdpDualResult sdp_multicast_dual(const ComplexMatrix& channels, const RealVector& zeta,
                                 const SdpDualOptions& options) {
  const Eigen::Index k = channels.rows();
  if (k < 1 || zeta.size() != k) throw std::invalid_argument("sdp_multicast_dual: size mismatch");
  if (!all_finite(channels) || !zeta.allFinite() || (zeta.array() < 0.0).any()) {
    throw std::invalid_argument("sdp_multicast_dual: channels finite and zeta >= 0 required");
  }
  std::vector<int> users;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (channels.row(j).squaredNorm() == 0.0) {
      throw DegenerateInput("sdp_multicast_dual: zero channel for user " + std::to_string(j));
    }
    if (zeta(j) > 0.0) users.push_back(static_cast<int>(j));
  }

  SdpDualResult out;
  out.lambda = RealVector::Zero(k);
  if (users.empty()) return out;

  const DualObjective objective(channels, zeta, users);
  const Eigen::Index n = objective.size();

  RealVector w(n);
  bool have_start = false;
  if (options.warm_start && options.warm_start->size() == k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const int j = users[static_cast<std::size_t>(i)];
      w(i) = std::max(0.0, (*options.warm_start)(j)) * zeta(j);
    }
    have_start = w.sum() > 0.0 && w.allFinite();
  }
  if (!have_start) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const int j = users[static_cast<std::size_t>(i)];
      w(i) = zeta(j) / channels.row(j).squaredNorm();
    }
  }
  w /= w.sum();

  double best_largest = objective.largest(w);
  RealVector best_w = w;

  // True when the certified bound improved visibly.
  auto record = [&](const RealVector& cand, double largest) {
    const bool visible = largest < best_largest * (1.0 - 1e-15);
    if (largest < best_largest) {
      best_largest = largest;
      best_w = cand;
    }
    return visible;
  };

  // Continuation on the smoothing width, relative to the current eigenvalue.
  const double mu_floor = 1e-14;
  double mu_rel = 1e-2;
  double step = 1.0 / best_largest;
  RealVector grad, trial;
  int it = 0;
  bool converged = false;
  int stalled = 0;
  while (it < options.max_iterations) {
    const double mu = mu_rel * best_largest;
    const double f0 = objective.smoothed_with_gradient(w, mu, grad);
    ++it;

    double f1 = f0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = project_to_simplex(w - step * grad);
      const RealVector delta = trial - w;
      if (delta.lpNorm<Eigen::Infinity>() == 0.0) break;
      f1 = objective.smoothed(trial, mu);
      if (f1 <= f0 + grad.dot(delta) + delta.squaredNorm() / (2.0 * step)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }

    const double moved = accepted ? (trial - w).lpNorm<Eigen::Infinity>() : 0.0;
    bool bound_improved = false;
    if (accepted) {
      w = trial;
      bound_improved = record(w, objective.largest(w));
      step *= 2.0;
    }
    // Thresholds sit just above rounding so ulp-level oscillation counts as a stall.
    const bool level_done = !accepted || moved < 1e-13 || f0 - f1 <= 1e-14 * std::abs(f0) ||
                            (!bound_improved && mu_rel <= mu_floor);
    stalled = level_done ? stalled + 1 : 0;
    if (stalled >= 3) {
      if (mu_rel <= mu_floor) {
        converged = true;
        break;
      }
      mu_rel = std::max(mu_floor, mu_rel * 0.1);
      stalled = 0;
    }
  }

  out.iterations = it;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int j = users[static_cast<std::size_t>(i)];
    out.lambda(j) = best_w(i) / zeta(j) / best_largest;
  }
  out.value = 1.0 / best_largest;
  if (!converged) {
    throw SolverFailure("sdp_multicast_dual: iteration cap reached before convergence", out.value);
  }
  return out;
}

}  // namespace slp::numerics

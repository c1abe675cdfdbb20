#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "slp/errors.hpp"
#include "slp/precoders.hpp"

namespace slp::precoders {

namespace {

void check_instance(const ComplexMatrix& h, const SymbolVector& d, const SnrTargets& targets) {
  if (h.rows() < 1 || h.cols() < 1) throw std::invalid_argument("channel matrix is empty");
  if (!numerics::all_finite(h)) throw std::invalid_argument("channel matrix has non-finite entries");
  if (d.size() != static_cast<std::size_t>(h.rows())) {
    throw std::invalid_argument("symbol vector length differs from user count");
  }
  d.validate();
  targets.validate(d.size());
}

// Right inverse of a full-row-rank H; throws RankError otherwise.
ComplexMatrix right_inverse(const ComplexMatrix& h) {
  if (h.rows() > h.cols()) {
    throw RankError("more users than antennas: no full-row-rank inverse", static_cast<int>(h.cols()));
  }
  const numerics::SvdResult f = numerics::svd(h);
  const int rank = numerics::numerical_rank(f.singular_values, 1e-10);
  if (rank < h.rows()) throw RankError("channel matrix is rank deficient", rank);
  return f.v * f.singular_values.cwiseInverse().cast<Complex>().asDiagonal() * f.u.adjoint();
}

ComplexVector scaled_symbols(const SymbolVector& d, const SnrTargets& targets) {
  ComplexVector t = d.values();
  for (std::size_t j = 0; j < d.size(); ++j) t(static_cast<Eigen::Index>(j)) *= targets.amplitude(j);
  return t;
}

}  // namespace

PrecoderOutput zf_precoder(const ComplexMatrix& h, const SymbolVector& d,
                           const SnrTargets& targets) {
  check_instance(h, d, targets);
  return make_output(Method::Zf, h, d, right_inverse(h) * scaled_symbols(d, targets));
}

PrecoderOutput mmse_precoder(const ComplexMatrix& h, const SymbolVector& d,
                             const SnrTargets& targets, const MmseOptions& options) {
  check_instance(h, d, targets);
  if (!(options.reference_power > 0.0)) {
    throw std::invalid_argument("mmse: reference power must be positive");
  }
  const Eigen::Index k = h.rows();
  const double reg = targets.noise_variance * static_cast<double>(k) / options.reference_power;
  const ComplexMatrix gram = h * h.adjoint();
  const ComplexMatrix regularized = gram + reg * ComplexMatrix::Identity(k, k);
  const Eigen::LLT<ComplexMatrix> llt(regularized);
  if (llt.info() != Eigen::Success) throw SolverFailure("mmse: regularized Gram not positive", reg);

  // Own-stream gain of user j is T_jj with T = H H^H (H H^H + reg I)^-1, real in (0, 1].
  const ComplexMatrix t = gram * llt.solve(ComplexMatrix::Identity(k, k));
  double scale = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double gain = t(j, j).real();
    if (targets.amplitude(static_cast<std::size_t>(j)) == 0.0) continue;
    if (!(gain > 0.0)) throw DegenerateInput("mmse: user " + std::to_string(j) + " has no gain");
    scale = std::max(scale, 1.0 / gain);
  }
  ComplexVector x = h.adjoint() * llt.solve(scaled_symbols(d, targets));
  x *= scale;
  return make_output(Method::Mmse, h, d, std::move(x));
}

PrecoderOutput cizf_precoder(const ComplexMatrix& h, const SymbolVector& d,
                             const SnrTargets& targets) {
  check_instance(h, d, targets);
  const ComplexMatrix inverse = right_inverse(h);
  const Eigen::Index k = h.rows();

  // Keep own terms and constructive crosstalk of the matched-filter crosstalk
  // matrix; the zero-forcing inverse removes everything else.
  const ComplexMatrix gram = h * h.adjoint();
  ComplexMatrix kept = ComplexMatrix::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    kept(j, j) = gram(j, j);
    for (Eigen::Index i = 0; i < k; ++i) {
      if (i == j) continue;
      const double norms = std::sqrt(gram(j, j).real() * gram(i, i).real());
      const Complex rho = gram(j, i) / norms;
      if (std::abs(rho) > 0.0 &&
          modulation::is_constructive(rho, d[static_cast<std::size_t>(j)],
                                      d[static_cast<std::size_t>(i)])) {
        kept(j, i) = gram(j, i);
      }
    }
  }
  const ComplexVector dv = d.values();
  const ComplexVector target = kept * dv;

  double beta = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double s = targets.amplitude(static_cast<std::size_t>(j));
    if (s == 0.0) continue;
    const double in_phase = (target(j) * std::conj(dv(j))).real();
    if (!(in_phase > 0.0)) throw DegenerateInput("cizf: no in-phase component for a user");
    beta = std::max(beta, s / in_phase);
  }
  return make_output(Method::Cizf, h, d, beta * (inverse * target));
}

}  // namespace slp::precoders

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

#include "phase_search.hpp"
#include "slp/errors.hpp"
#include "slp/numerics/qp.hpp"
#include "slp/precoders.hpp"

namespace slp::precoders {

namespace {

constexpr double kPi = std::numbers::pi;

void check_instance(const ComplexMatrix& h, const SymbolVector& d, const SnrTargets& targets) {
  if (h.rows() < 1 || h.cols() < 1) throw std::invalid_argument("channel matrix is empty");
  if (!numerics::all_finite(h)) throw std::invalid_argument("channel matrix has non-finite entries");
  const auto k = static_cast<std::size_t>(h.rows());
  if (d.size() != k) {
    throw std::invalid_argument("symbol vector has " + std::to_string(d.size()) +
                                " entries for " + std::to_string(k) + " users");
  }
  d.validate();
  targets.validate(k);
}

std::vector<double> amplitudes_of(const SnrTargets& targets, std::size_t users) {
  std::vector<double> s(users);
  for (std::size_t j = 0; j < users; ++j) s[j] = targets.amplitude(j);
  return s;
}

DualCertificate certificate_from(const RaySolution& sol, const ComplexMatrix& h,
                                 std::span<const double> phases,
                                 std::span<const double> offsets) {
  const std::size_t k = offsets.size();
  DualCertificate c;
  c.alpha = sol.alpha;
  c.mu = sol.mu;
  c.lambda.resize(k);
  c.gamma.resize(k);
  c.u.resize(k);
  c.offset.assign(offsets.begin(), offsets.end());
  for (std::size_t j = 0; j < k; ++j) {
    const auto row = static_cast<Eigen::Index>(j);
    const double a = (std::polar(1.0, -phases[j]) * (h.row(row) * sol.x)(0)).real();
    const double slope = sol.mu[j] * a;  // d power / d offset_j
    c.lambda[j] = std::max(0.0, slope);
    c.gamma[j] = std::max(0.0, -slope);
    c.u[j] = std::cos(offsets[j]);
  }
  return c;
}

PrecoderOutput solve_at_offsets(Method method, const ComplexMatrix& h, const SymbolVector& d,
                                std::span<const double> amplitudes,
                                std::span<const double> offsets) {
  std::vector<double> phases(d.size());
  for (std::size_t j = 0; j < d.size(); ++j) phases[j] = d.phase(j) + offsets[j];
  RaySolution sol = min_power_on_rays(h, phases, amplitudes);
  DualCertificate cert = certificate_from(sol, h, phases, offsets);
  PrecoderOutput out = make_output(method, h, d, std::move(sol.x));
  out.certificate = std::move(cert);
  return out;
}

// Power and envelope gradient d power / d offset_j = mu_j Re z_j.
struct SlopeEval {
  double power = 0.0;
  std::vector<double> slope;
};

std::optional<SlopeEval> slopes_at(const ComplexMatrix& h, const SymbolVector& d,
                                   std::span<const double> amplitudes,
                                   std::span<const double> offsets) {
  std::vector<double> phases(d.size());
  for (std::size_t j = 0; j < d.size(); ++j) phases[j] = d.phase(j) + offsets[j];
  try {
    const RaySolution sol = min_power_on_rays(h, phases, amplitudes);
    const DualCertificate c = certificate_from(sol, h, phases, offsets);
    SlopeEval e{sol.power, std::vector<double>(d.size())};
    for (std::size_t j = 0; j < d.size(); ++j) e.slope[j] = c.lambda[j] - c.gamma[j];
    return e;
  } catch (const InfeasibleError&) {
    return std::nullopt;
  }
}

// Power comparisons stop resolving the optimum near sqrt(eps); finish with
// projected coordinate Newton steps on the exact gradient, curvature from a
// finite difference of the gradient. Never accepts a visible power increase.
void newton_polish(const ComplexMatrix& h, const SymbolVector& d,
                   std::span<const double> amplitudes, std::span<const double> lower,
                   std::span<const double> upper, std::vector<double>& offsets) {
  std::optional<SlopeEval> cur = slopes_at(h, d, amplitudes, offsets);
  if (!cur) return;
  const double tol = 1e-13 * std::max(1.0, cur->power);
  for (int sweep = 0; sweep < 20; ++sweep) {
    bool moved = false;
    double worst = 0.0;
    for (std::size_t j = 0; j < offsets.size(); ++j) {
      const double g = cur->slope[j];
      if ((offsets[j] <= lower[j] && g >= 0.0) || (offsets[j] >= upper[j] && g <= 0.0)) continue;
      worst = std::max(worst, std::abs(g));
      if (std::abs(g) <= tol) continue;
      std::vector<double> probe = offsets;
      const double eps = 1e-6;
      probe[j] = std::clamp(offsets[j] - (g > 0.0 ? eps : -eps), lower[j], upper[j]);
      if (probe[j] == offsets[j]) continue;
      const std::optional<SlopeEval> p = slopes_at(h, d, amplitudes, probe);
      if (!p) continue;
      const double curvature = (g - p->slope[j]) / (offsets[j] - probe[j]);
      if (!(curvature > 0.0)) continue;
      std::vector<double> cand = offsets;
      cand[j] = std::clamp(offsets[j] - g / curvature, lower[j], upper[j]);
      const std::optional<SlopeEval> c = slopes_at(h, d, amplitudes, cand);
      if (!c || c->power > cur->power * (1.0 + 1e-14)) continue;
      const bool pinned = cand[j] == lower[j] || cand[j] == upper[j];
      if (!pinned && std::abs(c->slope[j]) >= std::abs(g)) continue;
      offsets = std::move(cand);
      cur = c;
      moved = true;
    }
    if (!moved || worst <= tol) break;
  }
}

}  // namespace

SnrTargets SnrTargets::uniform(std::size_t users, double zeta, double noise_variance) {
  return {std::vector<double>(users, zeta), noise_variance};
}

double SnrTargets::amplitude(std::size_t user) const {
  return std::sqrt(noise_variance * zeta.at(user));
}

void SnrTargets::validate(std::size_t users) const {
  if (zeta.size() != users) {
    throw std::invalid_argument("snr targets: " + std::to_string(zeta.size()) + " values for " +
                                std::to_string(users) + " users");
  }
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
    throw std::invalid_argument("snr targets: noise variance must be positive and finite");
  }
  for (double z : zeta) {
    if (!(z >= 0.0) || !std::isfinite(z)) {
      throw std::invalid_argument("snr targets: zeta must be finite and >= 0");
    }
  }
}

SymbolVector SymbolVector::from_indices(std::vector<int> indices, int order) {
  SymbolVector d{order, std::move(indices)};
  d.validate();
  return d;
}

modulation::PskSymbol SymbolVector::operator[](std::size_t user) const {
  return modulation::modulate(indices.at(user), order);
}

double SymbolVector::phase(std::size_t user) const {
  return modulation::constellation_phase(indices.at(user), order);
}

ComplexVector SymbolVector::values() const {
  ComplexVector v(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    v(static_cast<Eigen::Index>(j)) = (*this)[j].value;
  }
  return v;
}

void SymbolVector::validate() const {
  modulation::check_order(order);
  for (int m : indices) {
    if (m < 0 || m >= order) {
      throw std::out_of_range("symbol index " + std::to_string(m) + " outside [0, " +
                              std::to_string(order) + ")");
    }
  }
}

RelaxationConfig RelaxationConfig::uniform(std::size_t users, double margin, int grid_points) {
  return {std::vector<double>(users, margin), std::vector<double>(users, margin), grid_points};
}

RelaxationConfig RelaxationConfig::none(std::size_t users) { return uniform(users, 0.0, 1); }

void RelaxationConfig::validate(std::size_t users, int order) const {
  if (margin_below.size() != users || margin_above.size() != users) {
    throw std::invalid_argument("relaxation: one margin pair per user required");
  }
  if (grid_points < 1 || grid_points % 2 == 0) {
    throw std::invalid_argument("relaxation: grid_points must be odd and >= 1");
  }
  const double half = kPi / order;
  for (std::size_t j = 0; j < users; ++j) {
    for (double m : {margin_below[j], margin_above[j]}) {
      if (!(m >= 0.0) || m > half) {
        throw std::invalid_argument("relaxation: margins must lie in [0, pi/M]");
      }
    }
  }
}

bool RelaxationConfig::is_zero() const {
  return std::all_of(margin_below.begin(), margin_below.end(), [](double m) { return m == 0.0; }) &&
         std::all_of(margin_above.begin(), margin_above.end(), [](double m) { return m == 0.0; });
}

std::string_view method_name(Method method) {
  switch (method) {
    case Method::Cipm: return "cipm";
    case Method::Cipmr: return "cipmr";
    case Method::Zf: return "zf";
    case Method::Mmse: return "mmse";
    case Method::Cizf: return "cizf";
  }
  return "unknown";
}

PrecoderOutput make_output(Method method, const ComplexMatrix& h, const SymbolVector& d,
                           ComplexVector x) {
  PrecoderOutput out;
  out.method = method;
  out.received = h * x;
  out.power = x.squaredNorm();
  out.phase_offsets.resize(d.size());
  for (std::size_t j = 0; j < d.size(); ++j) {
    const Complex r = out.received(static_cast<Eigen::Index>(j));
    out.phase_offsets[j] = r == Complex(0.0, 0.0)
                               ? 0.0
                               : modulation::wrap_phase(std::arg(r) - d.phase(j));
  }
  out.x = std::move(x);
  return out;
}

RaySolution min_power_on_rays(const ComplexMatrix& h, std::span<const double> phases,
                              std::span<const double> amplitudes) {
  const Eigen::Index k = h.rows();
  const Eigen::Index m = h.cols();
  if (static_cast<Eigen::Index>(phases.size()) != k ||
      static_cast<Eigen::Index>(amplitudes.size()) != k) {
    throw std::invalid_argument("min_power_on_rays: one phase and amplitude per user required");
  }
  auto sys = numerics::RealConstraintSystem::with_variables(2 * m);
  sys.eq_matrix.resize(k, 2 * m);
  sys.eq_rhs = numerics::RealVector::Zero(k);
  sys.ineq_matrix.resize(k, 2 * m);
  sys.ineq_rhs.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    if (!std::isfinite(phases[ju]) || !(amplitudes[ju] >= 0.0)) {
      throw std::invalid_argument("min_power_on_rays: phases finite and amplitudes >= 0 required");
    }
    if (h.row(j).squaredNorm() == 0.0 && amplitudes[ju] > 0.0) {
      throw InfeasibleError("user " + std::to_string(j) + " has a zero channel", amplitudes[ju],
                            static_cast<int>(j));
    }
    const numerics::ComplexRow g = std::polar(1.0, -phases[ju]) * h.row(j);
    // Re(g x) >= s and Im(g x) == 0 over xi = [Re x; Im x].
    sys.eq_matrix.row(j) << g.imag(), g.real();
    sys.ineq_matrix.row(j) << g.real(), -g.imag();
    sys.ineq_rhs(j) = amplitudes[ju];
  }
  const numerics::QpSolution qp = numerics::min_norm_qp(sys);

  RaySolution out;
  out.x = ComplexVector(m);
  out.x.real() = qp.x.head(m);
  out.x.imag() = qp.x.tail(m);
  out.power = qp.x.squaredNorm();
  out.alpha.assign(qp.ineq_multipliers.data(), qp.ineq_multipliers.data() + k);
  out.mu.assign(qp.eq_multipliers.data(), qp.eq_multipliers.data() + k);
  return out;
}

PrecoderOutput cipm(const ComplexMatrix& h, const SymbolVector& d, const SnrTargets& targets) {
  check_instance(h, d, targets);
  const std::vector<double> zero(d.size(), 0.0);
  return solve_at_offsets(Method::Cipm, h, d, amplitudes_of(targets, d.size()), zero);
}

PrecoderOutput cipmr_subproblem(const ComplexMatrix& h, const SymbolVector& d,
                                const SnrTargets& targets, std::span<const double> offsets) {
  check_instance(h, d, targets);
  if (offsets.size() != d.size()) {
    throw std::invalid_argument("cipmr_subproblem: one offset per user required");
  }
  for (double o : offsets) {
    if (!std::isfinite(o)) throw std::invalid_argument("cipmr_subproblem: offsets must be finite");
  }
  return solve_at_offsets(Method::Cipmr, h, d, amplitudes_of(targets, d.size()), offsets);
}

PrecoderOutput cipmr_subproblem(const ComplexMatrix& h, const SymbolVector& d,
                                const SnrTargets& targets, double offset) {
  const std::vector<double> offsets(d.size(), offset);
  return cipmr_subproblem(h, d, targets, offsets);
}

GridSearchResult cipmr_grid(const ComplexMatrix& h, const SymbolVector& d,
                            const SnrTargets& targets, const RelaxationConfig& relax) {
  check_instance(h, d, targets);
  const std::size_t k = d.size();
  relax.validate(k, d.order);
  const std::vector<double> s = amplitudes_of(targets, k);

  GridSearchResult result;
  result.offsets.assign(k, 0.0);

  // The unrelaxed point is always a candidate; with zero margins it is the
  // whole search and takes exactly the cipm path.
  std::optional<PrecoderOutput> zero_node;
  try {
    zero_node = solve_at_offsets(Method::Cipmr, h, d, s, result.offsets);
  } catch (const InfeasibleError&) {
    ++result.infeasible;
  }
  ++result.evaluated;
  if (relax.is_zero()) {
    if (!zero_node) throw InfeasibleError("cipmr_grid: unrelaxed problem infeasible", 0.0);
    result.output = std::move(*zero_node);
    return result;
  }

  std::vector<double> lower(k), upper(k), spacing(k);
  const int n = relax.grid_points;
  for (std::size_t j = 0; j < k; ++j) {
    lower[j] = -relax.margin_below[j];
    upper[j] = relax.margin_above[j];
    spacing[j] = n > 1 ? (upper[j] - lower[j]) / (n - 1) : 0.0;
  }
  const bool shift_symmetric =
      std::all_of(lower.begin(), lower.end(), [&](double v) { return v == lower[0]; }) &&
      std::all_of(upper.begin(), upper.end(), [&](double v) { return v == upper[0]; });

  auto power_at = [&](const std::vector<double>& offsets) -> std::optional<double> {
    std::vector<double> phases(k);
    for (std::size_t j = 0; j < k; ++j) phases[j] = d.phase(j) + offsets[j];
    try {
      return min_power_on_rays(h, phases, s).power;
    } catch (const InfeasibleError&) {
      return std::nullopt;
    }
  };
  auto node_offsets = [&](const std::vector<int>& idx) {
    std::vector<double> o(k);
    for (std::size_t j = 0; j < k; ++j) {
      o[j] = n > 1 ? lower[j] + spacing[j] * idx[j] : 0.0;
    }
    return o;
  };

  // Odometer over the grid. With identical boxes a common shift of every
  // offset is a global rotation of x, so only nodes touching index 0 are new.
  std::map<std::vector<int>, double> powers;
  std::vector<int> idx(k, 0);
  for (;;) {
    const bool touches_edge = std::find(idx.begin(), idx.end(), 0) != idx.end();
    if (n > 1 && (!shift_symmetric || touches_edge)) {
      ++result.evaluated;
      if (auto p = power_at(node_offsets(idx))) {
        powers.emplace(idx, *p);
      } else {
        ++result.infeasible;
      }
    }
    std::size_t j = 0;
    while (j < k && ++idx[j] == n) idx[j++] = 0;
    if (j == k) break;
  }

  const double zero_power = zero_node ? zero_node->power : std::numeric_limits<double>::infinity();
  if (!zero_node && powers.empty()) {
    throw InfeasibleError("cipmr_grid: every grid node is infeasible", 0.0);
  }

  // Polish the best few grid-local minima; the zero node competes as is.
  std::vector<std::pair<double, std::vector<int>>> minima;
  for (const auto& [node, p] : powers) {
    bool local_min = true;
    for (std::size_t j = 0; j < k && local_min; ++j) {
      for (int step : {-1, 1}) {
        std::vector<int> nb = node;
        nb[j] += step;
        if (nb[j] < 0 || nb[j] >= n) continue;
        const auto it = powers.find(nb);
        if (it != powers.end() && it->second < p) {
          local_min = false;
          break;
        }
      }
    }
    if (local_min) minima.emplace_back(p, node);
  }
  std::sort(minima.begin(), minima.end());
  if (minima.size() > 4) minima.resize(4);

  std::vector<double> best_offsets = result.offsets;
  double best_power = zero_power;
  for (const auto& [p, node] : minima) {
    const double initial = *std::max_element(spacing.begin(), spacing.end());
    const detail::PhaseSearchResult r = detail::compass_search(
        power_at, node_offsets(node), p, lower, upper, initial, initial * 1e-11);
    if (r.value < best_power) {
      best_power = r.value;
      best_offsets = r.phases;
    }
  }

  if (best_power < zero_power) newton_polish(h, d, s, lower, upper, best_offsets);

  if (best_power == zero_power && zero_node) {
    result.output = std::move(*zero_node);
  } else {
    result.output = solve_at_offsets(Method::Cipmr, h, d, s, best_offsets);
  }
  result.offsets = best_offsets;
  return result;
}

double KktReport::worst() const {
  return std::max({stationarity_x, stationarity_phase, primal_feasibility, dual_feasibility,
                   complementarity, u_consistency});
}

KktReport kkt_residual(const PrecoderOutput& output, const DualCertificate& cert,
                       const ComplexMatrix& h, const SymbolVector& d, const SnrTargets& targets,
                       const RelaxationConfig& relax) {
  const std::size_t k = d.size();
  for (const auto* v : {&cert.alpha, &cert.mu, &cert.lambda, &cert.gamma, &cert.u, &cert.offset}) {
    if (v->size() != k) throw std::invalid_argument("kkt_residual: certificate size mismatch");
  }
  if (relax.margin_below.size() != k || relax.margin_above.size() != k) {
    throw std::invalid_argument("kkt_residual: relaxation size mismatch");
  }
  const ComplexVector& x = output.x;
  KktReport r;
  ComplexVector v = x;
  for (std::size_t j = 0; j < k; ++j) {
    const auto row = static_cast<Eigen::Index>(j);
    const double phase = d.phase(j) + cert.offset[j];
    v -= 0.5 * Complex(cert.alpha[j], cert.mu[j]) * std::polar(1.0, phase) * h.row(row).adjoint();

    const Complex z = std::polar(1.0, -phase) * (h.row(row) * x)(0);
    const double a = z.real();
    const double s = targets.amplitude(j);
    const double below = relax.margin_below[j];
    const double above = relax.margin_above[j];

    r.primal_feasibility = std::max({r.primal_feasibility, s - a, std::abs(z.imag()),
                                     -below - cert.offset[j], cert.offset[j] - above});
    r.stationarity_phase =
        std::max(r.stationarity_phase, std::abs(cert.mu[j] * a - cert.lambda[j] + cert.gamma[j]));
    r.dual_feasibility =
        std::max({r.dual_feasibility, -cert.alpha[j], -cert.lambda[j], -cert.gamma[j]});
    r.complementarity = std::max({r.complementarity, std::abs(cert.alpha[j] * (a - s)),
                                  std::abs(cert.lambda[j] * (cert.offset[j] + below)),
                                  std::abs(cert.gamma[j] * (above - cert.offset[j]))});
    r.u_consistency = std::max(r.u_consistency, std::abs(cert.u[j] - std::cos(cert.offset[j])));
  }
  r.stationarity_x = v.norm() / std::max(1.0, x.norm());
  return r;
}

}  // namespace slp::precoders

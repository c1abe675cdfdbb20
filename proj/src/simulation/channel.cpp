#include <cmath>
#include <stdexcept>

#include "slp/errors.hpp"
#include "slp/modulation.hpp"
#include "slp/simulation.hpp"

namespace slp::simulation {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

void ChannelModel::validate() const {
  if (users < 1) throw std::invalid_argument("users: must be >= 1");
  if (antennas < 1) throw std::invalid_argument("antennas: must be >= 1");
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("channel_variance: must be positive and finite");
  }
}

std::mt19937_64 make_stream(std::uint64_t master_seed, std::uint64_t point, std::uint64_t trial,
                            StreamPurpose purpose) {
  std::uint64_t s = splitmix64(master_seed);
  s = splitmix64(s ^ point);
  s = splitmix64(s ^ trial);
  s = splitmix64(s ^ static_cast<std::uint64_t>(purpose));
  return std::mt19937_64(s);
}

ComplexMatrix draw_channel(std::mt19937_64& stream, const ChannelModel& model) {
  model.validate();
  std::normal_distribution<double> normal(0.0, std::sqrt(model.variance / 2.0));
  ComplexMatrix h(model.users, model.antennas);
  for (int r = 0; r < model.users; ++r) {
    for (int c = 0; c < model.antennas; ++c) {
      const double re = normal(stream);
      const double im = normal(stream);
      h(r, c) = {re, im};
    }
  }
  return h;
}

SymbolVector draw_symbols(std::mt19937_64& stream, int users, int order) {
  modulation::check_order(order);
  std::uniform_int_distribution<int> pick(0, order - 1);
  SymbolVector d;
  d.order = order;
  d.indices.resize(static_cast<std::size_t>(users));
  for (int& m : d.indices) m = pick(stream);
  return d;
}

ComplexVector draw_noise(std::mt19937_64& stream, int users, double noise_variance) {
  if (!(noise_variance >= 0.0)) throw std::invalid_argument("noise variance must be >= 0");
  ComplexVector z = ComplexVector::Zero(users);
  if (noise_variance == 0.0) return z;
  std::normal_distribution<double> normal(0.0, std::sqrt(noise_variance / 2.0));
  for (int j = 0; j < users; ++j) {
    const double re = normal(stream);
    const double im = normal(stream);
    z(j) = {re, im};
  }
  return z;
}

TrialRecord detect_trial(const ComplexVector& received, double power, const SymbolVector& d,
                         const ComplexVector& noise) {
  const auto k = static_cast<Eigen::Index>(d.size());
  if (received.size() != k || noise.size() != k) {
    throw std::invalid_argument("detect_trial: dimension mismatch");
  }
  TrialRecord rec;
  rec.power = power;
  rec.sent = d.indices;
  rec.detected.resize(d.size());
  rec.error.resize(d.size());
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    rec.detected[ju] = modulation::detect(received(j) + noise(j), d.order).index;
    rec.error[ju] = rec.detected[ju] != rec.sent[ju];
  }
  return rec;
}

TrialRecord run_symbol_trial(const PrecoderOutput& output, const ComplexMatrix& h,
                             const SymbolVector& d, std::mt19937_64& noise_stream,
                             double noise_variance) {
  if (h.cols() != output.x.size() || static_cast<std::size_t>(h.rows()) != d.size()) {
    throw std::invalid_argument("run_symbol_trial: dimension mismatch");
  }
  const ComplexVector z = draw_noise(noise_stream, static_cast<int>(h.rows()), noise_variance);
  return detect_trial(h * output.x, output.x.squaredNorm(), d, z);
}

double energy_efficiency(std::span<const double> rates, std::span<const double> ser,
                         double power) {
  if (rates.size() != ser.size()) throw std::invalid_argument("energy_efficiency: size mismatch");
  if (!(power > 0.0)) throw DegenerateInput("energy_efficiency: power must be positive");
  double goodput = 0.0;
  for (std::size_t j = 0; j < rates.size(); ++j) goodput += rates[j] * (1.0 - ser[j]);
  return goodput / power;
}

}  // namespace slp::simulation

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "slp/errors.hpp"
#include "slp/modulation.hpp"
#include "slp/simulation.hpp"

namespace slp::simulation {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kZ95 = 1.96;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct PointSetup {
  double axis_db = 0.0;
  double zeta = 1.0;
  double channel_variance = 1.0;
};

struct Phasors {
  ComplexVector received;
  double power = 0.0;
};

bool is_instance_failure(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const InfeasibleError&) {
    return true;
  } catch (const RankError&) {
    return true;
  } catch (const DegenerateInput&) {
    return true;
  } catch (...) {
    return false;
  }
}

Phasors evaluate(const MethodSpec& spec, const ScenarioConfig& config, const ComplexMatrix& h,
                 const SymbolVector& d, const precoders::SnrTargets& targets) {
  PrecoderOutput out;
  switch (spec.kind) {
    case MethodKind::Cipm:
      out = precoders::cipm(h, d, targets);
      break;
    case MethodKind::Cipmr:
      out = precoders::cipmr_grid(
                h, d, targets,
                precoders::RelaxationConfig::uniform(d.size(), spec.phi, config.grid_points))
                .output;
      break;
    case MethodKind::Zf:
      out = precoders::zf_precoder(h, d, targets);
      break;
    case MethodKind::Mmse:
      out = precoders::mmse_precoder(h, d, targets, {config.mmse_reference_power});
      break;
    case MethodKind::Cizf:
      out = precoders::cizf_precoder(h, d, targets);
      break;
    default:
      throw std::logic_error("evaluate: bound methods carry no symbols");
  }
  return {std::move(out.received), out.power};
}

// The bounds are stated for noise-normalized SNR targets; the physical power
// for noise variance sigma^2 is sigma^2 times the normalized optimum.
double bound_power(const MethodSpec& spec, const ComplexMatrix& h,
                   const precoders::SnrTargets& targets) {
  const double scale = targets.noise_variance;
  if (spec.kind == MethodKind::Genie) return scale * precoders::genie_min_power(h, targets.zeta).total;
  return scale * precoders::multicast_min_power(h, targets.zeta).total;
}

std::vector<ChannelBatch> run_channel(const ScenarioConfig& config,
                                      const std::vector<MethodSpec>& specs,
                                      const PointSetup& setup, std::uint64_t point,
                                      std::uint64_t trial) {
  ChannelModel model = config.channel;
  model.variance = setup.channel_variance;
  auto channel_stream = make_stream(config.seed, point, trial, StreamPurpose::Channel);
  const ComplexMatrix h = draw_channel(channel_stream, model);
  const auto k = static_cast<std::size_t>(model.users);
  const auto targets = precoders::SnrTargets::uniform(k, setup.zeta, config.noise_variance);
  const double trial_noise = config.noise_free ? 0.0 : config.noise_variance;

  std::vector<ChannelBatch> out(specs.size());
  std::vector<std::map<std::vector<int>, Phasors>> cache(specs.size());
  std::vector<double> power_sum(specs.size(), 0.0);
  bool any_symbols = false;
  for (std::size_t m = 0; m < specs.size(); ++m) {
    out[m].ok = true;
    if (specs[m].has_symbols()) {
      out[m].errors.assign(k, 0.0);
      any_symbols = true;
      continue;
    }
    try {
      out[m].power = bound_power(specs[m], h, targets);
    } catch (...) {
      if (!is_instance_failure(std::current_exception())) throw;
      out[m].ok = false;
    }
  }
  if (!any_symbols) return out;

  auto symbol_stream = make_stream(config.seed, point, trial, StreamPurpose::Symbols);
  auto noise_stream = make_stream(config.seed, point, trial, StreamPurpose::Noise);
  for (int s = 0; s < config.symbols_per_channel; ++s) {
    const SymbolVector d = draw_symbols(symbol_stream, model.users, config.modulation_order);
    // Common noise across methods sharpens paired comparisons.
    const ComplexVector z = draw_noise(noise_stream, model.users, trial_noise);
    for (std::size_t m = 0; m < specs.size(); ++m) {
      if (!specs[m].has_symbols() || !out[m].ok) continue;
      auto it = cache[m].find(d.indices);
      if (it == cache[m].end()) {
        try {
          it = cache[m].emplace(d.indices, evaluate(specs[m], config, h, d, targets)).first;
        } catch (...) {
          if (!is_instance_failure(std::current_exception())) throw;
          out[m].ok = false;
          continue;
        }
      }
      const TrialRecord rec = detect_trial(it->second.received, it->second.power, d, z);
      power_sum[m] += rec.power;
      for (std::size_t j = 0; j < k; ++j) out[m].errors[j] += rec.error[j] ? 1.0 : 0.0;
      ++out[m].symbols;
    }
  }
  for (std::size_t m = 0; m < specs.size(); ++m) {
    if (!specs[m].has_symbols()) continue;
    if (out[m].ok) {
      out[m].power = power_sum[m] / out[m].symbols;
    } else {
      out[m] = ChannelBatch{};
    }
  }
  return out;
}

struct Moments {
  double mean = kNaN;
  double ci95 = kNaN;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  double sum = 0.0;
  for (double x : v) sum += x;
  m.mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) return m;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  m.ci95 = kZ95 * sd / std::sqrt(static_cast<double>(v.size()));
  return m;
}

MethodResult aggregate(const MethodSpec& spec, std::vector<ChannelBatch> batches, int users,
                       double rate) {
  MethodResult r;
  r.method = spec;
  std::vector<double> powers, goodput;
  std::vector<double> errors(static_cast<std::size_t>(users), 0.0);
  double symbols = 0.0;
  for (const ChannelBatch& b : batches) {
    if (!b.ok) {
      ++r.trials_skipped;
      continue;
    }
    ++r.trials_ok;
    powers.push_back(b.power);
    if (spec.has_symbols()) {
      double g = 0.0;
      for (std::size_t j = 0; j < errors.size(); ++j) {
        errors[j] += b.errors[j];
        g += rate * (1.0 - b.errors[j] / b.symbols);
      }
      goodput.push_back(g);
      symbols += b.symbols;
    }
  }
  const Moments p = moments(powers);
  r.mean_power = p.mean;
  r.power_ci95 = p.ci95;
  r.ser.assign(errors.size(), kNaN);
  r.rate_eff.assign(errors.size(), kNaN);
  r.eta = kNaN;
  r.eta_ci95 = kNaN;
  if (spec.has_symbols() && r.trials_ok > 0) {
    for (std::size_t j = 0; j < errors.size(); ++j) {
      r.ser[j] = errors[j] / symbols;
      r.rate_eff[j] = rate * (1.0 - r.ser[j]);
    }
    r.eta = r.mean_power > 0.0 ? energy_efficiency(std::vector<double>(errors.size(), rate),
                                                   r.ser, r.mean_power)
                               : kNaN;
    if (r.trials_ok >= 2 && r.mean_power > 0.0) {
      std::vector<double> lin(powers.size());
      for (std::size_t c = 0; c < powers.size(); ++c) {
        lin[c] = (goodput[c] - r.eta * powers[c]) / r.mean_power;
      }
      r.eta_ci95 = moments(lin).ci95;
    }
  }
  r.batches = std::move(batches);
  return r;
}

int resolve_threads(int requested) { return requested > 0 ? requested : default_threads(); }

std::vector<SweepResult> run_sweep(const ScenarioConfig& config,
                                   const std::vector<PointSetup>& points, bool parallel,
                                   int threads) {
  const std::vector<MethodSpec> specs = config.method_specs();
  const double rate = modulation::bits_per_symbol(config.modulation_order);
  const int trials = config.trials;
  std::vector<SweepResult> results;
  results.reserve(points.size());

  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    std::vector<std::vector<ChannelBatch>> per_trial(static_cast<std::size_t>(trials));
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(trials));
    auto body = [&](int t) {
      try {
        per_trial[static_cast<std::size_t>(t)] =
            run_channel(config, specs, points[pi], pi, static_cast<std::uint64_t>(t));
      } catch (...) {
        failures[static_cast<std::size_t>(t)] = std::current_exception();
      }
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
      for (int t = 0; t < trials; ++t) body(t);
    } else {
      for (int t = 0; t < trials; ++t) body(t);
    }
    for (const auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }

    // Fixed-order fold: trial index order, independent of scheduling.
    SweepResult point;
    point.axis_db = points[pi].axis_db;
    for (std::size_t m = 0; m < specs.size(); ++m) {
      std::vector<ChannelBatch> batches;
      batches.reserve(per_trial.size());
      for (auto& row : per_trial) batches.push_back(std::move(row[m]));
      point.methods.push_back(
          aggregate(specs[m], std::move(batches), config.channel.users, rate));
    }
    results.push_back(std::move(point));
  }
  return results;
}

std::vector<PointSetup> power_points(const ScenarioConfig& config) {
  config.validate();
  std::vector<double> axis = config.zeta_db;
  std::sort(axis.begin(), axis.end());
  std::vector<PointSetup> points;
  for (double z : axis) points.push_back({z, db_to_linear(z), config.channel.variance});
  return points;
}

std::vector<PointSetup> ee_points(const ScenarioConfig& config) {
  config.validate();
  if (config.channel_snr_db.empty()) throw std::invalid_argument("channel_snr_db: empty");
  if (config.zeta_db.size() != 1) {
    throw std::invalid_argument("zeta_db: exactly one value required for the efficiency sweep");
  }
  std::vector<double> axis = config.channel_snr_db;
  std::sort(axis.begin(), axis.end());
  std::vector<PointSetup> points;
  for (double snr : axis) {
    if (!std::isfinite(snr)) throw std::invalid_argument("channel_snr_db: values must be finite");
    points.push_back({snr, db_to_linear(config.zeta_db[0]),
                      config.noise_variance * db_to_linear(snr)});
  }
  return points;
}

std::vector<std::pair<const ChannelBatch*, const ChannelBatch*>> common_channels(
    const MethodResult& a, const MethodResult& b) {
  if (a.batches.size() != b.batches.size()) {
    throw std::invalid_argument("paired difference: results from different sweeps");
  }
  std::vector<std::pair<const ChannelBatch*, const ChannelBatch*>> out;
  for (std::size_t c = 0; c < a.batches.size(); ++c) {
    if (a.batches[c].ok && b.batches[c].ok) out.emplace_back(&a.batches[c], &b.batches[c]);
  }
  return out;
}

PairedDifference from_samples(const std::vector<double>& v) {
  const Moments m = moments(v);
  return {m.mean, m.ci95, static_cast<int>(v.size())};
}

double mean_ser(const ChannelBatch& b) {
  double e = 0.0;
  for (double x : b.errors) e += x;
  return e / (static_cast<double>(b.errors.size()) * b.symbols);
}

}  // namespace

std::string MethodSpec::name() const {
  switch (kind) {
    case MethodKind::Cipm: return "cipm";
    case MethodKind::Cipmr: return "cipmr";
    case MethodKind::Zf: return "zf";
    case MethodKind::Mmse: return "mmse";
    case MethodKind::Cizf: return "cizf";
    case MethodKind::Genie: return "genie";
    case MethodKind::Multicast: return "multicast";
  }
  return "unknown";
}

bool MethodSpec::has_symbols() const {
  return kind != MethodKind::Genie && kind != MethodKind::Multicast;
}

MethodKind parse_method(const std::string& name) {
  static const std::map<std::string, MethodKind> names{
      {"cipm", MethodKind::Cipm},   {"cipmr", MethodKind::Cipmr},
      {"zf", MethodKind::Zf},       {"mmse", MethodKind::Mmse},
      {"cizf", MethodKind::Cizf},   {"genie", MethodKind::Genie},
      {"multicast", MethodKind::Multicast}};
  const auto it = names.find(name);
  if (it == names.end()) throw std::invalid_argument("methods: unknown method '" + name + "'");
  return it->second;
}

void ScenarioConfig::validate() const {
  channel.validate();
  try {
    modulation::check_order(modulation_order);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("modulation_order: must be a power of two >= 2");
  }
  if (zeta_db.empty()) throw std::invalid_argument("zeta_db: empty");
  for (double z : zeta_db) {
    if (!std::isfinite(z)) throw std::invalid_argument("zeta_db: values must be finite");
  }
  if (methods.empty()) throw std::invalid_argument("methods: empty");
  std::vector<MethodKind> seen;
  for (const auto& m : methods) {
    const MethodKind k = parse_method(m);
    if (std::find(seen.begin(), seen.end(), k) != seen.end()) {
      throw std::invalid_argument("methods: duplicate method '" + m + "'");
    }
    seen.push_back(k);
  }
  const bool relaxed = std::find(seen.begin(), seen.end(), MethodKind::Cipmr) != seen.end();
  if (relaxed && phi.empty()) throw std::invalid_argument("phi: required when methods has cipmr");
  const double half = std::numbers::pi / modulation_order;
  for (double p : phi) {
    if (!(p >= 0.0) || p > half) throw std::invalid_argument("phi: values must lie in [0, pi/M]");
  }
  if (trials < 1) throw std::invalid_argument("trials: must be >= 1");
  if (symbols_per_channel < 1) throw std::invalid_argument("symbols_per_channel: must be >= 1");
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
    throw std::invalid_argument("noise_variance: must be positive and finite");
  }
  if (grid_points < 1 || grid_points % 2 == 0) {
    throw std::invalid_argument("grid_points: must be odd and >= 1");
  }
  if (!(mmse_reference_power > 0.0)) {
    throw std::invalid_argument("mmse_reference_power: must be positive");
  }
}

std::vector<MethodSpec> ScenarioConfig::method_specs() const {
  std::vector<MethodSpec> specs;
  for (const auto& m : methods) {
    const MethodKind k = parse_method(m);
    if (k == MethodKind::Cipmr) {
      for (double p : phi) specs.push_back({k, p});
    } else {
      specs.push_back({k, 0.0});
    }
  }
  std::sort(specs.begin(), specs.end(), [](const MethodSpec& a, const MethodSpec& b) {
    const std::string na = a.name(), nb = b.name();
    return na != nb ? na < nb : a.phi < b.phi;
  });
  specs.erase(std::unique(specs.begin(), specs.end()), specs.end());
  return specs;
}

const MethodResult& SweepResult::at(const MethodSpec& spec) const {
  for (const auto& m : methods) {
    if (m.method == spec) return m;
  }
  throw std::out_of_range("sweep result has no method " + spec.name());
}

int default_threads() {
  if (const char* env = std::getenv("SLP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return omp_get_max_threads();
}

std::vector<SweepResult> sweep_power(const ScenarioConfig& config, const SweepOptions& options) {
  return run_sweep(config, power_points(config), true, resolve_threads(options.threads));
}

std::vector<SweepResult> sweep_ee(const ScenarioConfig& config, const SweepOptions& options) {
  return run_sweep(config, ee_points(config), true, resolve_threads(options.threads));
}

std::vector<SweepResult> sweep_power_serial(const ScenarioConfig& config) {
  return run_sweep(config, power_points(config), false, 1);
}

std::vector<SweepResult> sweep_ee_serial(const ScenarioConfig& config) {
  return run_sweep(config, ee_points(config), false, 1);
}

PairedDifference paired_power_difference(const MethodResult& a, const MethodResult& b) {
  std::vector<double> v;
  for (const auto& [x, y] : common_channels(a, b)) v.push_back(x->power - y->power);
  return from_samples(v);
}

PairedDifference paired_ser_difference(const MethodResult& a, const MethodResult& b) {
  if (!a.method.has_symbols() || !b.method.has_symbols()) {
    throw std::invalid_argument("paired SER difference needs symbol-level methods");
  }
  std::vector<double> v;
  for (const auto& [x, y] : common_channels(a, b)) v.push_back(mean_ser(*x) - mean_ser(*y));
  return from_samples(v);
}

PairedDifference paired_eta_difference(const MethodResult& a, const MethodResult& b,
                                       double rate) {
  if (!a.method.has_symbols() || !b.method.has_symbols()) {
    throw std::invalid_argument("paired efficiency difference needs symbol-level methods");
  }
  const auto pairs = common_channels(a, b);
  if (pairs.empty()) return {kNaN, kNaN, 0};
  auto goodput = [&](const ChannelBatch& c) {
    double g = 0.0;
    for (double e : c.errors) g += rate * (1.0 - e / c.symbols);
    return g;
  };
  double ga = 0.0, pa = 0.0, gb = 0.0, pb = 0.0;
  for (const auto& [x, y] : pairs) {
    ga += goodput(*x);
    pa += x->power;
    gb += goodput(*y);
    pb += y->power;
  }
  const double n = static_cast<double>(pairs.size());
  ga /= n;
  pa /= n;
  gb /= n;
  pb /= n;
  const double eta_a = ga / pa;
  const double eta_b = gb / pb;
  std::vector<double> lin;
  for (const auto& [x, y] : pairs) {
    lin.push_back((goodput(*x) - eta_a * x->power) / pa - (goodput(*y) - eta_b * y->power) / pb);
  }
  PairedDifference d = from_samples(lin);
  d.mean = eta_a - eta_b;
  return d;
}

}  // namespace slp::simulation

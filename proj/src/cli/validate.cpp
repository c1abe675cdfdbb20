#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>

#include "json.hpp"
#include "slp/cli.hpp"
#include "slp/errors.hpp"
#include "slp/modulation.hpp"
#include "slp/oracles.hpp"
#include "slp/precoders.hpp"

namespace slp::cli {

namespace {

namespace pc = precoders;
using numerics::Complex;
using numerics::ComplexMatrix;
using numerics::ComplexVector;
using numerics::RealMatrix;
using numerics::RealVector;
using json = nlohmann::json;

constexpr double kPi = std::numbers::pi;
constexpr std::array<double, 5> kZetaDb{0.0, 3.0, 6.0, 9.0, 12.0};

/// One random test case: a 2 x 3 channel, symbols, an SNR target and a
/// uniform draw in [0, 1) that properties use for their own parameters.
struct Instance {
  ComplexMatrix h;
  pc::SymbolVector d;
  double zeta_db = 0.0;
  double extra = 0.0;
};

struct Outcome {
  bool pass = true;
  double residual = 0.0;
  std::string detail;
};

struct Context {
  bool inject_fault = false;
};

using InstanceCheck = std::function<Outcome(const Instance&, const Context&)>;
using AggregateCheck = std::function<Outcome(int count, std::uint64_t seed, const Context&)>;

struct Property {
  std::string name;
  int full = 0;
  int quick = 0;
  int order = 4;  // 0: cycle through 2, 4, 8
  InstanceCheck check;
  AggregateCheck aggregate;
};

double from_db(double db) { return std::pow(10.0, db / 10.0); }

Instance make_instance(std::uint64_t seed, std::size_t property, int index, int order) {
  auto stream = simulation::make_stream(seed, 0x5100 + property, static_cast<std::uint64_t>(index),
                                        simulation::StreamPurpose::Channel);
  Instance in;
  in.h = simulation::draw_channel(stream, {2, 3, 1.0});
  const int m = order > 0 ? order : std::array{2, 4, 8}[static_cast<std::size_t>(index) % 3];
  in.d = simulation::draw_symbols(stream, 2, m);
  in.zeta_db = kZetaDb[static_cast<std::size_t>(index) % kZetaDb.size()];
  in.extra = std::uniform_real_distribution<double>(0.0, 1.0)(stream);
  return in;
}

pc::SnrTargets targets_of(const Instance& in) {
  return pc::SnrTargets::uniform(static_cast<std::size_t>(in.h.rows()), from_db(in.zeta_db), 1.0);
}

std::vector<double> zeta_of(const Instance& in) {
  return std::vector<double>(static_cast<std::size_t>(in.h.rows()), from_db(in.zeta_db));
}

// The precoder under test; the fault hook halves its output so the suite can
// demonstrate that it catches a broken solver.
pc::PrecoderOutput cipm_under_test(const ComplexMatrix& h, const pc::SymbolVector& d,
                                   const pc::SnrTargets& t, const Context& ctx) {
  auto out = pc::cipm(h, d, t);
  if (ctx.inject_fault) out = pc::make_output(out.method, h, d, ComplexVector(0.5 * out.x));
  return out;
}

pc::GridSearchResult cipmr(const Instance& in, double margin) {
  return pc::cipmr_grid(in.h, in.d, targets_of(in),
                        pc::RelaxationConfig::uniform(static_cast<std::size_t>(in.h.rows()), margin));
}

double relative(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

Outcome check_ordering(const Instance& in, const Context& ctx) {
  const auto t = targets_of(in);
  const auto zeta = zeta_of(in);
  const double multicast = pc::multicast_min_power(in.h, zeta).total;
  const double relaxed5 = cipmr(in, kPi / 5).output.power;
  const double relaxed8 = cipmr(in, kPi / 8).output.power;
  const double exact = cipm_under_test(in.h, in.d, t, ctx).power;
  const double zf = pc::zf_precoder(in.h, in.d, t).power;
  const std::array chain{multicast, relaxed5, relaxed8, exact, zf};
  Outcome o;
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    o.residual = std::max(o.residual, chain[i] - chain[i + 1]);
  }
  o.pass = o.residual <= 1e-8;
  if (!o.pass) {
    o.detail = "multicast " + format_number(multicast) + ", cipmr(pi/5) " + format_number(relaxed5) +
               ", cipmr(pi/8) " + format_number(relaxed8) + ", cipm " + format_number(exact) +
               ", zf " + format_number(zf);
  }
  return o;
}

Outcome check_special_case(const Instance& in, const Context& ctx) {
  const auto t = targets_of(in);
  const auto exact = cipm_under_test(in.h, in.d, t, ctx);
  const auto grid = pc::cipmr_grid(in.h, in.d, t, pc::RelaxationConfig::none(2));
  Outcome o;
  o.residual = std::abs(grid.output.power - exact.power);
  o.pass = grid.output.power == exact.power && grid.output.x == exact.x;
  if (!o.pass) o.detail = fmt("cipmr(0) %.17g vs cipm %.17g", grid.output.power, exact.power);
  return o;
}

Outcome check_cipm_oracle(const Instance& in, const Context& ctx) {
  const auto t = targets_of(in);
  const double power = cipm_under_test(in.h, in.d, t, ctx).power;
  std::vector<double> phases, amps;
  for (std::size_t j = 0; j < in.d.size(); ++j) {
    phases.push_back(in.d.phase(j));
    amps.push_back(t.amplitude(j));
  }
  const double oracle = oracles::rays_projected_gradient(in.h, phases, amps, 7);
  Outcome o;
  o.residual = std::abs(power - oracle) / oracle;
  o.pass = o.residual <= 1e-3;
  if (!o.pass) o.detail = fmt("cipm %.12g vs oracle %.12g", power, oracle);
  return o;
}

Outcome check_cipmr_grid_oracle(const Instance& in, const Context&) {
  const auto t = targets_of(in);
  std::vector<double> phases, amps;
  for (std::size_t j = 0; j < in.d.size(); ++j) {
    phases.push_back(in.d.phase(j));
    amps.push_back(t.amplitude(j));
  }
  const double margin = kPi / 8;
  const double power = cipmr(in, margin).output.power;
  const double fine = oracles::relaxed_fine_grid(in.h, phases, amps, margin, 121);
  Outcome o;
  o.residual = std::max(0.0, (power - fine) / fine);
  o.pass = o.residual <= 1e-9;
  if (!o.pass) o.detail = fmt("cipmr(pi/8) %.12g above fine grid %.12g", power, fine);
  return o;
}

Outcome check_genie_oracle(const Instance& in, const Context&) {
  const auto zeta = zeta_of(in);
  const auto bound = pc::genie_min_power(in.h, zeta);
  const auto dec = pc::genie_decomposition(in.h);
  const Eigen::Index k = in.h.rows();
  RealMatrix f(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) f(r, c) = dec.g.row(r).squaredNorm() * std::norm(dec.xi(r, c));
  }
  const RealVector g = Eigen::Map<const RealVector>(zeta.data(), k);
  const auto oracle = oracles::enumerate_lp(f, g);
  Outcome o;
  o.residual = relative(bound.total, oracle.total);
  o.pass = o.residual <= 1e-9;
  if (!o.pass) o.detail = fmt("genie %.12g vs vertex enumeration %.12g", bound.total, oracle.total);
  return o;
}

Outcome check_multicast_oracle(const Instance& in, const Context&) {
  const auto zeta = zeta_of(in);
  const auto bound = pc::multicast_min_power(in.h, zeta);
  const double grid = oracles::multicast_dual_grid(in.h, zeta);
  Outcome o;
  o.residual = std::max(bound.gap, relative(bound.total, grid));
  o.pass = o.residual <= 1e-4;
  if (!o.pass) {
    o.detail = fmt("multicast %.12g, dual grid %.12g", bound.total, grid) +
               fmt(", gap %.3g", bound.gap);
  }
  return o;
}

Outcome check_kkt(const Instance& in, const Context& ctx) {
  const auto t = targets_of(in);
  Outcome o;
  auto direction_stream = simulation::make_stream(static_cast<std::uint64_t>(in.extra * 1e9), 0, 0,
                                                  simulation::StreamPurpose::Noise);
  std::normal_distribution<double> normal;
  const auto certify = [&](const pc::PrecoderOutput& out, const pc::RelaxationConfig& relax,
                           const char* label) {
    if (!out.certificate) {
      o.pass = false;
      o.detail += std::string(label) + ": no certificate; ";
      return;
    }
    const double worst = pc::kkt_residual(out, *out.certificate, in.h, in.d, t, relax).worst();
    o.residual = std::max(o.residual, worst);
    if (worst > 1e-6) o.detail += std::string(label) + fmt(": residual %.3g; ", worst);

    ComplexVector u(out.x.size());
    for (auto& z : u) z = {normal(direction_stream), normal(direction_stream)};
    const ComplexVector moved = out.x + 1e-2 * out.x.norm() * u / u.norm();
    const auto perturbed = pc::make_output(out.method, in.h, in.d, moved);
    const double bad = pc::kkt_residual(perturbed, *out.certificate, in.h, in.d, t, relax).worst();
    if (bad <= 1e-6) o.detail += std::string(label) + fmt(": perturbed accepted (%.3g); ", bad);
  };
  const auto none = pc::RelaxationConfig::none(2);
  certify(cipm_under_test(in.h, in.d, t, ctx), none, "cipm");
  for (double margin : {kPi / 5, kPi / 8}) {
    const auto relax = pc::RelaxationConfig::uniform(2, margin);
    certify(pc::cipmr_grid(in.h, in.d, t, relax).output, relax, "cipmr");
  }
  o.pass = o.pass && o.detail.empty();
  return o;
}

Outcome check_noise_free(const Instance& in, const Context& ctx) {
  const auto t = targets_of(in);
  Outcome o;
  const auto decode = [&](const pc::PrecoderOutput& out, const char* label) {
    const ComplexVector r = in.h * out.x;
    for (std::size_t j = 0; j < in.d.size(); ++j) {
      if (modulation::detect(r(static_cast<Eigen::Index>(j)), in.d.order).index != in.d.indices[j]) {
        o.pass = false;
        o.residual += 1.0;
        o.detail += std::string(label) + " user " + std::to_string(j + 1) + " misdetected; ";
      }
    }
  };
  decode(cipm_under_test(in.h, in.d, t, ctx), "cipm");
  const double margin = (0.05 + 0.9 * in.extra) * kPi / in.d.order;
  decode(cipmr(in, margin).output, "cipmr");
  return o;
}

// Scale factor c with |c| log-uniform in [0.1, 10] and a phase from the draw.
Complex scale_of(const Instance& in) {
  const double mag = std::pow(10.0, 2.0 * in.extra - 1.0);
  return std::polar(mag, 2.0 * kPi * std::fmod(in.extra * 7.0, 1.0));
}

Outcome check_scaling(const Instance& in, const Context& ctx) {
  const auto t = targets_of(in);
  const auto zeta = zeta_of(in);
  const Complex c = scale_of(in);
  const ComplexMatrix hc = c * in.h;
  const double factor = std::norm(c);
  Outcome o;
  const auto compare = [&](double base, double scaled, const char* label) {
    const double r = std::abs(scaled * factor - base) / base;
    o.residual = std::max(o.residual, r);
    if (r > 1e-8) o.detail += std::string(label) + fmt(": %.12g vs %.12g; ", base, scaled * factor);
  };
  compare(cipm_under_test(in.h, in.d, t, ctx).power, pc::cipm(hc, in.d, t).power, "cipm");
  const auto relax = pc::RelaxationConfig::uniform(2, kPi / 5);
  const auto base = pc::cipmr_grid(in.h, in.d, t, relax);
  const auto scaled = pc::cipmr_grid(hc, in.d, t, relax);
  compare(base.output.power, scaled.output.power, "cipmr");
  for (std::size_t j = 0; j < base.offsets.size(); ++j) {
    // The power is stationary in the offsets, so they are resolved only to
    // about the square root of the power tolerance.
    const double shift = std::abs(base.offsets[j] - scaled.offsets[j]);
    if (shift > 1e-6) o.detail += fmt("cipmr offset moved by %.3g; ", shift);
  }
  compare(pc::zf_precoder(in.h, in.d, t).power, pc::zf_precoder(hc, in.d, t).power, "zf");
  compare(pc::cizf_precoder(in.h, in.d, t).power, pc::cizf_precoder(hc, in.d, t).power, "cizf");
  compare(pc::genie_min_power(in.h, zeta).total, pc::genie_min_power(hc, zeta).total, "genie");
  compare(pc::multicast_min_power(in.h, zeta).total, pc::multicast_min_power(hc, zeta).total,
          "multicast");
  o.pass = o.detail.empty();
  return o;
}

Outcome check_rotation(const Instance& in, const Context& ctx) {
  const auto t = targets_of(in);
  const int m = in.d.order;
  const int steps = 1 + static_cast<int>(in.extra * (m - 1));
  auto rotated_idx = in.d.indices;
  for (int& i : rotated_idx) i = (i + steps) % m;
  const auto dr = pc::SymbolVector::from_indices(rotated_idx, m);
  const Complex turn = std::polar(1.0, 2.0 * kPi * steps / m);
  Outcome o;
  const auto compare = [&](double a, double b, const char* label) {
    const double r = std::abs(a - b) / a;
    o.residual = std::max(o.residual, r);
    if (r > 1e-9) o.detail += std::string(label) + fmt(": %.12g vs %.12g; ", a, b);
  };
  const auto base = cipm_under_test(in.h, in.d, t, ctx);
  const auto rot = pc::cipm(in.h, dr, t);
  compare(base.power, rot.power, "cipm");
  const double drift = (rot.x - turn * base.x).norm() / base.x.norm();
  o.residual = std::max(o.residual, drift);
  if (drift > 1e-8) o.detail += fmt("cipm x not rotated (%.3g); ", drift);
  const auto relax = pc::RelaxationConfig::uniform(2, kPi / 5);
  compare(pc::cipmr_grid(in.h, in.d, t, relax).output.power,
          pc::cipmr_grid(in.h, dr, t, relax).output.power, "cipmr");
  compare(pc::zf_precoder(in.h, in.d, t).power, pc::zf_precoder(in.h, dr, t).power, "zf");
  compare(pc::mmse_precoder(in.h, in.d, t).power, pc::mmse_precoder(in.h, dr, t).power, "mmse");
  compare(pc::cizf_precoder(in.h, in.d, t).power, pc::cizf_precoder(in.h, dr, t).power, "cizf");
  o.pass = o.detail.empty();
  return o;
}

// The interference coefficient seen the other way round is the conjugate:
// h_k w_j / (|h_k||w_j|) with w = h^H gives conj(psi_jk).
Outcome check_mutuality(const Instance& in, const Context&) {
  const int m = in.d.order;
  const Complex psi = std::polar(1.0, 2.0 * kPi * in.extra);
  Outcome o;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      const auto da = modulation::modulate(a, m);
      const auto db = modulation::modulate(b, m);
      if (modulation::is_constructive(psi, da, db) !=
          modulation::is_constructive(std::conj(psi), db, da)) {
        o.residual += 1.0;
        o.detail += "M=" + std::to_string(m) + " pair (" + std::to_string(a) + "," +
                    std::to_string(b) + "); ";
      }
    }
  }
  o.pass = o.residual == 0.0;
  return o;
}

// SER per user must not rise with zeta beyond the combined 95% half-width.
Outcome check_ser_monotone(int count, std::uint64_t seed, const Context&) {
  simulation::ScenarioConfig sc;
  sc.zeta_db.assign(kZetaDb.begin(), kZetaDb.end());
  sc.methods = {"cipm", "cipmr", "zf"};
  sc.phi = {kPi / 8};
  sc.trials = count;
  sc.symbols_per_channel = 200;
  sc.seed = seed;
  const auto sweep = simulation::sweep_power(sc);
  Outcome o;
  const auto stats = [](const simulation::MethodResult& r, std::size_t user) {
    double sum = 0.0, sq = 0.0;
    int n = 0;
    for (const auto& b : r.batches) {
      if (!b.ok) continue;
      const double s = b.errors[user] / b.symbols;
      sum += s;
      sq += s * s;
      ++n;
    }
    const double mean = sum / n;
    const double var = n > 1 ? (sq - n * mean * mean) / (n - 1) : 0.0;
    return std::pair{mean, std::max(var, 0.0) / n};
  };
  for (std::size_t p = 0; p + 1 < sweep.size(); ++p) {
    for (std::size_t mi = 0; mi < sweep[p].methods.size(); ++mi) {
      const auto& lo = sweep[p].methods[mi];
      const auto& hi = sweep[p + 1].methods[mi];
      for (std::size_t j = 0; j < lo.ser.size(); ++j) {
        const auto [m0, v0] = stats(lo, j);
        const auto [m1, v1] = stats(hi, j);
        const double excess = (m1 - m0) - 1.96 * std::sqrt(v0 + v1);
        o.residual = std::max(o.residual, std::max(0.0, m1 - m0));
        if (excess > 0.0) {
          o.detail += lo.method.name() + " user " + std::to_string(j + 1) + " at " +
                      format_number(sweep[p + 1].axis_db) + " dB; ";
        }
      }
    }
  }
  o.pass = o.detail.empty();
  return o;
}

std::vector<Property> properties() {
  return {
      {"ordering: multicast <= cipmr(pi/5) <= cipmr(pi/8) <= cipm <= zf", 1000, 100, 4,
       check_ordering, {}},
      {"special case: cipmr at phi = 0 equals cipm", 1000, 100, 4, check_special_case, {}},
      {"oracle: cipm vs projected-gradient dual", 100, 20, 4, check_cipm_oracle, {}},
      {"oracle: cipmr(pi/8) vs fine offset grid", 100, 20, 4, check_cipmr_grid_oracle, {}},
      {"oracle: genie vs LP vertex enumeration", 1000, 100, 4, check_genie_oracle, {}},
      {"oracle: multicast duality gap and dual grid", 200, 40, 4, check_multicast_oracle, {}},
      {"kkt: cipm and cipmr certified, 1e-2 perturbations rejected", 500, 50, 4, check_kkt, {}},
      {"noise-free: cipm and cipmr decode exactly", 1000, 100, 0, check_noise_free, {}},
      {"scaling invariance: power x 1/|c|^2", 200, 30, 4, check_scaling, {}},
      {"rotation invariance: common symbol rotation", 200, 30, 4, check_rotation, {}},
      {"mutuality: constructive interference is mutual", 300, 30, 0, check_mutuality, {}},
      {"ser monotonicity in zeta", 200, 40, 4, {}, check_ser_monotone},
  };
}

json complex_matrix_json(const ComplexMatrix& h) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < h.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < h.cols(); ++c) row.push_back({h(r, c).real(), h(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

ComplexMatrix complex_matrix_from(const json& rows) {
  const auto k = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(rows.at(0).size());
  ComplexMatrix h(k, m);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) {
      const auto& z = rows.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c));
      h(r, c) = {z.at(0).get<double>(), z.at(1).get<double>()};
    }
  }
  return h;
}

json instance_json(const Instance& in) {
  return {{"h", complex_matrix_json(in.h)},
          {"order", in.d.order},
          {"symbols", in.d.indices},
          {"zeta_db", in.zeta_db},
          {"extra", in.extra}};
}

Instance instance_from(const json& j) {
  Instance in;
  in.h = complex_matrix_from(j.at("h"));
  in.d = pc::SymbolVector::from_indices(j.at("symbols").get<std::vector<int>>(),
                                        j.at("order").get<int>());
  in.zeta_db = j.at("zeta_db").get<double>();
  in.extra = j.at("extra").get<double>();
  return in;
}

Outcome guarded(const std::function<Outcome()>& run) {
  try {
    return run();
  } catch (const std::exception& e) {
    return {false, std::numeric_limits<double>::infinity(), std::string("exception: ") + e.what()};
  }
}

void report(std::ostream& out, const std::string& name, bool pass, int count, double worst) {
  out << name << " : " << (pass ? "PASS" : "FAIL") << " (" << count << " instances, worst residual "
      << format_number(worst) << ")\n";
}

int replay(const ValidateOptions& options, std::ostream& out, std::ostream& err) {
  json doc;
  try {
    std::ifstream in(*options.replay_in);
    if (!in) throw ConfigError("--replay: cannot read '" + *options.replay_in + "'");
    doc = json::parse(in);
  } catch (const std::exception& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  }
  const auto props = properties();
  bool all = true;
  try {
    const Context ctx{doc.value("inject_fault", false)};
    for (const auto& f : doc.at("failures")) {
      const auto name = f.at("property").get<std::string>();
      const auto it = std::find_if(props.begin(), props.end(),
                                   [&](const Property& p) { return p.name == name; });
      if (it == props.end()) throw ConfigError("--replay: unknown property '" + name + "'");
      Outcome o;
      if (it->aggregate) {
        o = guarded([&] {
          return it->aggregate(f.at("count").get<int>(), f.at("seed").get<std::uint64_t>(), ctx);
        });
      } else {
        const Instance inst = instance_from(f.at("instance"));
        o = guarded([&] { return it->check(inst, ctx); });
      }
      report(out, name, o.pass, 1, o.residual);
      if (!o.pass) out << "  " << o.detail << '\n';
      all = all && o.pass;
    }
  } catch (const std::exception& e) {
    err << "usage error: malformed replay file: " << e.what() << '\n';
    return kUsageError;
  }
  return all ? kOk : kValidationFailure;
}

}  // namespace

int cmd_validate(const ValidateOptions& options, std::ostream& out, std::ostream& err) {
  if (options.replay_in) return replay(options, out, err);
  if (options.instances && *options.instances < 1) {
    err << "usage error: --instances: must be >= 1\n";
    return kUsageError;
  }
  const Context ctx{options.inject_fault};
  const auto props = properties();
  json failures = json::array();
  for (std::size_t pi = 0; pi < props.size(); ++pi) {
    const auto& prop = props[pi];
    const int count = options.instances.value_or(options.quick ? prop.quick : prop.full);
    Outcome summary;
    if (prop.aggregate) {
      summary = guarded([&] { return prop.aggregate(count, options.seed, ctx); });
      if (!summary.pass) {
        failures.push_back({{"property", prop.name},
                            {"seed", options.seed},
                            {"count", count},
                            {"detail", summary.detail}});
      }
    } else {
      for (int i = 0; i < count; ++i) {
        const Instance inst = make_instance(options.seed, pi, i, prop.order);
        const Outcome o = guarded([&] { return prop.check(inst, ctx); });
        summary.residual = std::max(summary.residual, o.residual);
        if (!o.pass && summary.pass) {
          summary.pass = false;
          summary.detail = "instance " + std::to_string(i) + ": " + o.detail;
          failures.push_back({{"property", prop.name},
                              {"seed", options.seed},
                              {"index", i},
                              {"instance", instance_json(inst)},
                              {"detail", o.detail}});
        }
      }
    }
    report(out, prop.name, summary.pass, count, summary.residual);
    if (!summary.pass) out << "  " << summary.detail << '\n';
    out.flush();
  }

  if (failures.empty()) {
    out << "all properties passed\n";
    return kOk;
  }
  const json doc{{"inject_fault", options.inject_fault}, {"failures", failures}};
  std::ofstream file(options.replay_out, std::ios::trunc);
  if (!file) {
    err << "cannot write replay file '" << options.replay_out << "'\n";
  } else {
    file << doc.dump(2) << '\n';
    out << "replay written to " << options.replay_out << '\n';
  }
  return kValidationFailure;
}

}  // namespace slp::cli

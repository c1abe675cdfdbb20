// Acceptance criteria 1-9: one PASS/FAIL line each, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "slp/cli.hpp"
#include "slp/errors.hpp"
#include "slp/oracles.hpp"
#include "slp/precoders.hpp"
#include "slp/simulation.hpp"

using namespace slp;
using namespace slp::precoders;
using numerics::ComplexMatrix;
using numerics::ComplexVector;
using numerics::RealMatrix;
using numerics::RealVector;
namespace sim = slp::simulation;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::array<double, 5> kZetaDb{0.0, 3.0, 6.0, 9.0, 12.0};

double from_db(double db) { return std::pow(10.0, db / 10.0); }

struct Verdict {
  bool pass = true;
  std::string summary;
};

struct Instance {
  ComplexMatrix h;
  SymbolVector d;
  double zeta = 1.0;
};

// Random M = 3, K = 2 QPSK instance; `stream_id` keeps criteria independent.
Instance draw(std::uint64_t stream_id, int index, double zeta_db) {
  auto s = sim::make_stream(2024, stream_id, static_cast<std::uint64_t>(index),
                            sim::StreamPurpose::Channel);
  Instance in;
  in.h = sim::draw_channel(s, {2, 3, 1.0});
  in.d = sim::draw_symbols(s, 2, 4);
  in.zeta = from_db(zeta_db);
  return in;
}

struct Stats {
  double mean = 0.0, half = 0.0;
};

Stats stats(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  const double sd = std::sqrt(s / static_cast<double>(v.size() - 1));
  return {m, 1.96 * sd / std::sqrt(static_cast<double>(v.size()))};
}

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Verdict criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = 1000;
  Verdict v;
  double worst_violation = 0.0;
  double weakest_margin = std::numeric_limits<double>::infinity();
  const char* names[] = {"multicast<cipmr(pi/5)", "cipmr(pi/5)<cipmr(pi/8)", "cipmr(pi/8)<cipm",
                         "cipm<zf"};
  for (double zdb : kZetaDb) {
    std::vector<std::vector<double>> gaps(4);
    for (int i = 0; i < n; ++i) {
      const auto in = draw(1, i, zdb);
      const auto t = SnrTargets::uniform(2, in.zeta);
      const std::vector<double> zeta{in.zeta, in.zeta};
      const std::array chain{
          multicast_min_power(in.h, zeta).total,
          cipmr_grid(in.h, in.d, t, RelaxationConfig::uniform(2, kPi / 5)).output.power,
          cipmr_grid(in.h, in.d, t, RelaxationConfig::uniform(2, kPi / 8)).output.power,
          cipm(in.h, in.d, t).power, zf_precoder(in.h, in.d, t).power};
      for (std::size_t k = 0; k < 4; ++k) {
        const double gap = chain[k + 1] - chain[k];
        worst_violation = std::max(worst_violation, -gap);
        gaps[k].push_back(gap);
      }
    }
    for (std::size_t k = 0; k < 4; ++k) {
      const Stats s = stats(gaps[k]);
      weakest_margin = std::min(weakest_margin, (s.mean - s.half) / s.half);
      if (!(s.mean - s.half > 0.0)) {
        v.pass = false;
        v.summary += std::string(names[k]) + " mean gap " + g(s.mean) + " +- " + g(s.half) +
                     " at " + g(zdb) + " dB; ";
      }
    }
  }
  if (worst_violation > 1e-8) v.pass = false;
  const double secs = seconds_since(t0);
  if (secs >= 120.0) v.pass = false;
  v.summary += "5 x " + std::to_string(n) + " instances, worst ordering violation " +
               g(worst_violation) + ", smallest (mean - ci)/ci " + g(weakest_margin) + ", " +
               g(secs) + " s";
  return v;
}

Verdict criterion2() {
  Verdict v;
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto in = draw(2, i, kZetaDb[static_cast<std::size_t>(i % 5)]);
    const auto t = SnrTargets::uniform(2, in.zeta);
    const auto grid = cipmr_grid(in.h, in.d, t, RelaxationConfig::none(2));
    const auto exact = cipm(in.h, in.d, t);
    if (!(grid.output.x == exact.x) || grid.output.power != exact.power) ++mismatches;
  }
  v.pass = mismatches == 0;
  v.summary = "1000 instances, " + std::to_string(mismatches) + " not bit-identical";
  return v;
}

Verdict criterion3() {
  Verdict v;
  double worst_cipm = 0.0, worst_genie = 0.0, worst_gap = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto in = draw(3, i, kZetaDb[static_cast<std::size_t>(i % 5)]);
    const auto t = SnrTargets::uniform(2, in.zeta);
    const double power = cipm(in.h, in.d, t).power;
    const std::vector<double> phases{in.d.phase(0), in.d.phase(1)};
    const std::vector<double> amps{t.amplitude(0), t.amplitude(1)};
    const double oracle = oracles::rays_projected_gradient(in.h, phases, amps, 99);
    worst_cipm = std::max(worst_cipm, std::abs(power - oracle) / oracle);
  }
  for (int i = 0; i < 1000; ++i) {
    const auto in = draw(4, i, kZetaDb[static_cast<std::size_t>(i % 5)]);
    const std::vector<double> zeta{in.zeta, in.zeta};
    const auto bound = genie_min_power(in.h, zeta);
    const auto dec = genie_decomposition(in.h);
    RealMatrix f(2, 2);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) f(r, c) = dec.g.row(r).squaredNorm() * std::norm(dec.xi(r, c));
    }
    const auto lp = oracles::enumerate_lp(f, RealVector{{in.zeta, in.zeta}});
    worst_genie = std::max(worst_genie, std::abs(bound.total - lp.total) / lp.total);
  }
  for (int i = 0; i < 200; ++i) {
    const auto in = draw(5, i, kZetaDb[static_cast<std::size_t>(i % 5)]);
    const auto bound = multicast_min_power(in.h, std::vector<double>{in.zeta, in.zeta});
    worst_gap = std::max(worst_gap, bound.gap);
  }
  v.pass = worst_cipm <= 1e-3 && worst_genie <= 1e-12 && worst_gap <= 1e-4;
  v.summary = "cipm vs projected-gradient worst rel " + g(worst_cipm) +
              " (100); genie vs LP enumeration worst rel " + g(worst_genie) +
              " (1000); multicast worst duality gap " + g(worst_gap) + " (200)";
  return v;
}

Verdict criterion4() {
  Verdict v;
  std::mt19937_64 rng(404);
  std::normal_distribution<double> n;
  double worst_accepted = 0.0;
  double weakest_rejection = std::numeric_limits<double>::infinity();
  int solutions = 0, rejected = 0;
  for (int i = 0; i < 500; ++i) {
    const auto in = draw(6, i, kZetaDb[static_cast<std::size_t>(i % 5)]);
    const auto t = SnrTargets::uniform(2, in.zeta);
    for (double margin : {0.0, kPi / 8, kPi / 5}) {
      const auto relax = RelaxationConfig::uniform(2, margin);
      const auto out = margin == 0.0 ? cipm(in.h, in.d, t) : cipmr_grid(in.h, in.d, t, relax).output;
      ++solutions;
      if (!out.certificate) {
        v.pass = false;
        continue;
      }
      const double w = kkt_residual(out, *out.certificate, in.h, in.d, t, relax).worst();
      worst_accepted = std::max(worst_accepted, w);
      ComplexVector u(3);
      for (auto& z : u) z = {n(rng), n(rng)};
      const ComplexVector moved = out.x + 1e-2 * out.x.norm() * u / u.norm();
      const auto bad = make_output(out.method, in.h, in.d, moved);
      const double b = kkt_residual(bad, *out.certificate, in.h, in.d, t, relax).worst();
      weakest_rejection = std::min(weakest_rejection, b);
      rejected += b > 1e-6;
    }
  }
  v.pass = v.pass && worst_accepted <= 1e-6 && rejected == solutions;
  v.summary = std::to_string(solutions) + " cipm/cipmr solutions, worst accepted residual " +
              g(worst_accepted) + ", perturbed rejected " + std::to_string(rejected) + "/" +
              std::to_string(solutions) + " (smallest rejected residual " + g(weakest_rejection) + ")";
  return v;
}

Verdict criterion5() {
  sim::ScenarioConfig c;
  c.zeta_db = {4.7121};
  c.methods = {"cipm", "cipmr"};
  c.phi = {kPi / 16, kPi / 8, kPi / 5, 0.999 * kPi / 4};
  c.trials = 100;
  c.symbols_per_channel = 100;
  c.noise_free = true;
  c.seed = 505;
  const auto r = sim::sweep_power(c);
  Verdict v;
  double errors = 0.0;
  long symbols = 0;
  int skipped = 0;
  for (const auto& m : r[0].methods) {
    skipped += m.trials_skipped;
    for (const auto& b : m.batches) {
      for (double e : b.errors) errors += e;
      symbols += b.symbols;
    }
  }
  v.pass = errors == 0.0 && skipped == 0;
  v.summary = std::to_string(r[0].methods.size()) + " methods (cipm, cipmr at pi/16, pi/8, pi/5, " +
              "0.999 pi/4) x 10^4 noise-free trials: " + g(errors) + " symbol errors over " +
              std::to_string(symbols) + " symbol periods";
  return v;
}

Verdict criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  sim::ScenarioConfig c;
  c.zeta_db = {4.7121};
  c.channel_snr_db = {0, 4, 8, 12, 16, 20};
  c.methods = {"cipm", "cipmr", "cizf"};
  c.phi = {kPi / 5};
  c.trials = 200;
  c.symbols_per_channel = 500;
  c.seed = 606;
  const auto r = sim::sweep_ee(c);
  Verdict v;
  const double rate = 2.0;
  std::ostringstream detail;
  for (std::size_t p = r.size() / 2; p < r.size(); ++p) {
    const auto& cipm_r = r[p].at({sim::MethodKind::Cipm, 0.0});
    const auto& relaxed = r[p].at({sim::MethodKind::Cipmr, kPi / 5});
    const auto& cizf_r = r[p].at({sim::MethodKind::Cizf, 0.0});
    const auto ser = sim::paired_ser_difference(relaxed, cipm_r);
    const auto eta_rc = sim::paired_eta_difference(relaxed, cipm_r, rate);
    const auto eta_cz = sim::paired_eta_difference(cipm_r, cizf_r, rate);
    const bool ok = ser.mean > ser.ci95 && eta_rc.mean > eta_rc.ci95 && eta_cz.mean > eta_cz.ci95;
    v.pass = v.pass && ok;
    detail << g(r[p].axis_db) << " dB: dSER " << g(ser.mean) << "+-" << g(ser.ci95) << ", deta(r-c) "
           << g(eta_rc.mean) << "+-" << g(eta_rc.ci95) << ", deta(c-z) " << g(eta_cz.mean) << "+-"
           << g(eta_cz.ci95) << (ok ? "" : " [violated]") << "; ";
  }
  const double secs = seconds_since(t0);
  if (secs >= 600.0) v.pass = false;
  v.summary = detail.str() + "1e5 symbols per point, " + g(secs) + " s";
  return v;
}

Verdict criterion7() {
  sim::ScenarioConfig c;
  c.channel = {1, 3, 1.0};
  c.zeta_db = {4.0, 8.0, 12.0};
  c.methods = {"zf"};
  c.trials = 1000;
  c.symbols_per_channel = 1000;
  c.seed = 707;
  const auto r = sim::sweep_power(c);
  Verdict v;
  std::ostringstream detail;
  for (const auto& point : r) {
    const auto& m = point.methods[0];
    const double n = 1e6;
    const double exact = oracles::psk_ser(4, from_db(point.axis_db));
    const double se = std::sqrt(exact * (1 - exact) / n);
    const double z = (m.ser[0] - exact) / se;
    v.pass = v.pass && std::abs(z) <= 3.0 && m.trials_ok == 1000;
    detail << g(point.axis_db) << " dB: " << g(m.ser[0]) << " vs " << g(exact) << " (" << g(z)
           << " se); ";
  }
  v.summary = detail.str() + "QPSK, 10^6 symbols per point";
  return v;
}

Verdict criterion8() {
  const fs::path dir = fs::temp_directory_path() / "slp-acceptance-determinism";
  fs::create_directories(dir);
  std::ofstream(dir / "power.cfg") << "zeta_db = 0, 6, 12\n"
                                      "phi = pi/5, pi/8\n"
                                      "methods = cipm, cipmr, zf, mmse, cizf, genie, multicast\n"
                                      "trials = 40\n"
                                      "symbols_per_channel = 50\n"
                                      "seed = 808\n";
  std::ofstream(dir / "ee.cfg") << "zeta_db = 4.7121\n"
                                   "channel_snr_db = 0, 10, 20\n"
                                   "phi = pi/5\n"
                                   "methods = cipm, cipmr, zf, mmse, cizf\n"
                                   "trials = 40\n"
                                   "symbols_per_channel = 50\n"
                                   "seed = 809\n";
  Verdict v;
  int runs = 0;
  for (const char* kind : {"power", "ee"}) {
    std::string reference;
    for (int threads : {1, 1, 2, 4, 7}) {
      std::ostringstream out, err;
      cli::SweepFlags flags;
      flags.threads = threads;
      const fs::path cfg = dir / (std::string(kind) + ".cfg");
      const int code = std::string(kind) == "power" ? cli::cmd_sweep_power(cfg, flags, out, err)
                                                     : cli::cmd_sweep_ee(cfg, flags, out, err);
      ++runs;
      if (code != cli::kOk) {
        v.pass = false;
        v.summary += std::string(kind) + " failed: " + err.str() + "; ";
        continue;
      }
      if (reference.empty()) reference = out.str();
      if (out.str() != reference) {
        v.pass = false;
        v.summary += std::string(kind) + " differs at " + std::to_string(threads) + " threads; ";
      }
    }
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  v.summary += std::to_string(runs) + " CLI sweeps (power and ee, 1/1/2/4/7 threads), byte-identical CSV " +
               (v.pass ? "in every case" : "violated");
  return v;
}

Verdict criterion9() {
  cli::ValidateOptions opts;
  opts.replay_out = (fs::temp_directory_path() / "slp-acceptance-replay.json").string();
  std::ostringstream out, err;
  const int code = cli::cmd_validate(opts, out, err);
  std::istringstream lines(out.str());
  std::string line, picked;
  for (const char* key : {"scaling invariance", "rotation invariance", "mutuality", "ser monotonicity"}) {
    lines.clear();
    lines.seekg(0);
    while (std::getline(lines, line)) {
      if (line.rfind(key, 0) == 0) picked += "\n    " + line;
    }
  }
  Verdict v;
  v.pass = code == cli::kOk;
  v.summary = "validate exit " + std::to_string(code) + picked;
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"1 bound ordering", criterion1},
      {"2 zero-margin special case", criterion2},
      {"3 oracle equivalence", criterion3},
      {"4 KKT certification", criterion4},
      {"5 noise-free correctness", criterion5},
      {"6 SER/EE trade-off at zeta = 4.7121 dB", criterion6},
      {"7 single-user analytic SER", criterion7},
      {"8 determinism", criterion8},
      {"9 property suite", criterion9},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %s: %s  -- %s\n", name.c_str(), v.pass ? "PASS" : "FAIL", v.summary.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

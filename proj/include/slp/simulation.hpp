#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "slp/precoders.hpp"

namespace slp::simulation {

using numerics::ComplexMatrix;
using numerics::ComplexVector;
using precoders::PrecoderOutput;
using precoders::SymbolVector;

struct ChannelModel {
  int users = 2;
  int antennas = 3;
  double variance = 1.0;  // per complex entry

  void validate() const;
  friend bool operator==(const ChannelModel&, const ChannelModel&) = default;
};

/// Independent stream purposes derived from one master seed.
enum class StreamPurpose : std::uint64_t { Channel = 1, Symbols = 2, Noise = 3 };

/// Counter-based stream: the generator for (point, trial, purpose) depends
/// on nothing else, so trials can run in any order on any thread.
std::mt19937_64 make_stream(std::uint64_t master_seed, std::uint64_t point, std::uint64_t trial,
                            StreamPurpose purpose);

/// K x M i.i.d. CN(0, variance) entries.
ComplexMatrix draw_channel(std::mt19937_64& stream, const ChannelModel& model);

SymbolVector draw_symbols(std::mt19937_64& stream, int users, int order);

/// K i.i.d. CN(0, noise_variance) samples; zeros when noise_variance == 0.
ComplexVector draw_noise(std::mt19937_64& stream, int users, double noise_variance);

struct TrialRecord {
  std::vector<int> sent;
  std::vector<int> detected;
  std::vector<bool> error;
  double power = 0.0;
};

/// y_j = r_j + z_j for precomputed received phasors r = H x, then detection.
TrialRecord detect_trial(const ComplexVector& received, double power, const SymbolVector& d,
                         const ComplexVector& noise);

/// y = H x + z with z drawn from `noise_stream`, then per-user detection.
TrialRecord run_symbol_trial(const PrecoderOutput& output, const ComplexMatrix& h,
                             const SymbolVector& d, std::mt19937_64& noise_stream,
                             double noise_variance);

/// eta = sum_j R_j (1 - SER_j) / power. Throws DegenerateInput for power <= 0.
double energy_efficiency(std::span<const double> rates, std::span<const double> ser,
                         double power);

enum class MethodKind { Cipm, Cipmr, Zf, Mmse, Cizf, Genie, Multicast };

struct MethodSpec {
  MethodKind kind = MethodKind::Cipm;
  double phi = 0.0;  // relaxation margin, cipmr only

  std::string name() const;
  bool has_symbols() const;  // false for the two bounds (power only)
  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

/// Parses one of cipm, cipmr, zf, mmse, cizf, genie, multicast.
MethodKind parse_method(const std::string& name);

struct ScenarioConfig {
  ChannelModel channel;
  int modulation_order = 4;
  std::vector<double> zeta_db{4.7121};
  std::vector<double> channel_snr_db;  // sweep_ee axis
  std::vector<double> phi;             // one cipmr entry per value
  std::vector<std::string> methods{"cipm"};
  int trials = 1000;                   // channels per axis point
  int symbols_per_channel = 1000;
  std::uint64_t seed = 1;
  double noise_variance = 1.0;         // design sigma^2
  int grid_points = 41;
  double mmse_reference_power = 1.0;
  bool noise_free = false;             // trial noise off, design sigma^2 kept

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
  std::vector<MethodSpec> method_specs() const;  // cipmr expanded per phi, sorted
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Per-channel accumulation for one method.
struct ChannelBatch {
  bool ok = false;
  double power = 0.0;          // mean ||x||^2 over the channel's symbols
  std::vector<double> errors;  // per user
  int symbols = 0;
};

struct MethodResult {
  MethodSpec method;
  double mean_power = 0.0;
  double power_ci95 = 0.0;
  std::vector<double> ser;       // per user; NaN for the bounds
  std::vector<double> rate_eff;  // R_j (1 - SER_j)
  double eta = 0.0;
  double eta_ci95 = 0.0;
  int trials_ok = 0;
  int trials_skipped = 0;
  std::vector<ChannelBatch> batches;  // one per channel, in trial order
};

struct SweepResult {
  double axis_db = 0.0;
  std::vector<MethodResult> methods;  // in method_specs() order

  const MethodResult& at(const MethodSpec& spec) const;
};

struct SweepOptions {
  int threads = 0;  // 0: SLP_THREADS if set, else the OpenMP default
};

/// Axis: zeta in dB, channel variance from the config.
std::vector<SweepResult> sweep_power(const ScenarioConfig& config, const SweepOptions& options = {});
/// Axis: channel SNR sigma_h^2 / sigma^2 in dB, one zeta.
std::vector<SweepResult> sweep_ee(const ScenarioConfig& config, const SweepOptions& options = {});

/// Single-threaded reference implementations of the same sweeps.
std::vector<SweepResult> sweep_power_serial(const ScenarioConfig& config);
std::vector<SweepResult> sweep_ee_serial(const ScenarioConfig& config);

/// Paired mean difference a - b over channels where both methods succeeded,
/// with a 95% normal half-width.
struct PairedDifference {
  double mean = 0.0;
  double ci95 = 0.0;
  int channels = 0;
};

PairedDifference paired_power_difference(const MethodResult& a, const MethodResult& b);
PairedDifference paired_ser_difference(const MethodResult& a, const MethodResult& b);
/// Difference of energy efficiencies via a linearized ratio estimator.
PairedDifference paired_eta_difference(const MethodResult& a, const MethodResult& b, double rate);

/// Thread count used when SweepOptions::threads == 0.
int default_threads();

}  // namespace slp::simulation

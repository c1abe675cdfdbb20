#include <cmath>
#include <fstream>
#include <ostream>
#include <system_error>

#include "slp/cli.hpp"
#include "slp/errors.hpp"
#include "slp/modulation.hpp"

namespace slp::cli {

namespace {

using SweepFn = std::vector<simulation::SweepResult> (*)(const simulation::ScenarioConfig&,
                                                         const simulation::SweepOptions&);

// Writes the whole file next to its destination and renames it into place,
// so a failed run never leaves a partial CSV behind.
void write_atomically(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("output_path: cannot write '" + path.string() + "'");
    out << text;
    out.flush();
    if (!out) throw ConfigError("output_path: write to '" + path.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ConfigError("output_path: cannot rename into '" + path.string() + "'");
  }
}

int run_sweep(SweepFn sweep, const std::filesystem::path& config_path, const SweepFlags& flags,
              bool allow_noise_free, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    if (flags.threads < 0) throw ConfigError("--threads: must be >= 0");
    if (flags.noise_free && !allow_noise_free) {
      throw ConfigError("--noise-free: only valid for sweep-ee");
    }
    config = load_config(config_path);
    config.scenario.noise_free = flags.noise_free;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  }

  std::string csv;
  try {
    const auto results = sweep(config.scenario, {flags.threads});
    csv = results_csv(results, config.scenario.channel.users);
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    err << (code == kUsageError ? "config error: " : "solver failure: ") << e.what() << '\n';
    return code;
  }

  const std::string destination = flags.output.value_or(config.output_path);
  try {
    if (destination.empty() || destination == "-") {
      out << csv;
      out.flush();
    } else {
      write_atomically(destination, csv);
    }
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  }
  return kOk;
}

std::string complex_text(numerics::Complex z) {
  return format_number(z.real()) + (z.imag() < 0 ? "-" : "+") +
         format_number(std::abs(z.imag())) + "i";
}

}  // namespace

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error) || dynamic_cast<const std::invalid_argument*>(&error) ||
      dynamic_cast<const std::out_of_range*>(&error)) {
    return kUsageError;
  }
  return kSolverFailure;
}

int cmd_sweep_power(const std::filesystem::path& config, const SweepFlags& flags,
                    std::ostream& out, std::ostream& err) {
  return run_sweep(&simulation::sweep_power, config, flags, false, out, err);
}

int cmd_sweep_ee(const std::filesystem::path& config, const SweepFlags& flags, std::ostream& out,
                 std::ostream& err) {
  return run_sweep(&simulation::sweep_ee, config, flags, true, out, err);
}

int cmd_classify(const ClassifyArgs& args, std::ostream& out, std::ostream& err) {
  numerics::Complex psi;
  modulation::PskSymbol dj, dk;
  try {
    const numerics::ComplexVector h = parse_complex_list(args.h_j);
    const numerics::ComplexVector w = parse_complex_list(args.w_k);
    if (h.size() != w.size()) throw ConfigError("--hj/--wk: lengths differ");
    modulation::check_order(args.order);
    dj = modulation::modulate(args.d_j, args.order);
    dk = modulation::modulate(args.d_k, args.order);
    psi = modulation::interference_coefficient(h.transpose(), w);
  } catch (const std::exception& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  }

  const auto cls = modulation::classify(psi, dj, dk);
  const numerics::Complex psi_dk = psi * dk.value;
  const numerics::Complex psi_dj = psi * dj.value;
  const double offset =
      psi_dk == numerics::Complex{} ? std::nan("") : modulation::wrap_phase(std::arg(psi_dk) - dj.phase());
  out << "psi_jk = " << complex_text(psi) << '\n'
      << "|psi_jk| = " << format_number(std::abs(psi)) << '\n'
      << "phase condition: angle(psi d_k) - angle(d_j) = " << format_number(offset)
      << " within +-pi/" << args.order << " : " << (cls.phase_condition ? "true" : "false") << '\n'
      << "sign condition: Re(d_k) Re(psi d_j) = " << format_number(dk.value.real() * psi_dj.real())
      << ", Im(d_k) Im(psi d_j) = " << format_number(dk.value.imag() * psi_dj.imag()) << " : "
      << (cls.sign_condition ? "true" : "false") << '\n'
      << "verdict: "
      << (cls.constructive ? "constructive"
                           : cls.neutral ? "neutral (not constructive)" : "destructive")
      << '\n';
  return kOk;
}

}  // namespace slp::cli

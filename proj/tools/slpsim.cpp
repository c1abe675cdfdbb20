#include <iostream>

#include "CLI11.hpp"
#include "slp/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Symbol-level constructive-interference precoding simulator"};
  app.require_subcommand(1);

  std::string power_config;
  slp::cli::SweepFlags power_flags;
  auto* power = app.add_subcommand("sweep-power", "Transmit power versus SNR target");
  power->add_option("config", power_config, "Scenario config file")->required();
  power->add_option("--threads", power_flags.threads, "Worker threads (0: SLP_THREADS or default)");
  power->add_option("--output", power_flags.output, "CSV destination (overrides output_path)");

  std::string ee_config;
  slp::cli::SweepFlags ee_flags;
  auto* ee = app.add_subcommand("sweep-ee", "SER and energy efficiency versus channel SNR");
  ee->add_option("config", ee_config, "Scenario config file")->required();
  ee->add_option("--threads", ee_flags.threads, "Worker threads (0: SLP_THREADS or default)");
  ee->add_option("--output", ee_flags.output, "CSV destination (overrides output_path)");
  ee->add_flag("--noise-free", ee_flags.noise_free, "Run trials without receiver noise");

  slp::cli::ValidateOptions vopts;
  auto* validate = app.add_subcommand("validate", "Run the oracle and invariant suites");
  validate->add_flag("--quick", vopts.quick, "Reduced instance counts");
  validate->add_option("--seed", vopts.seed, "Master seed");
  validate->add_option("--instances", vopts.instances, "Instance count for every property");
  validate->add_flag("--inject-fault", vopts.inject_fault, "Use a deliberately broken cipm");
  validate->add_option("--replay-out", vopts.replay_out, "Where failing instances are written");
  validate->add_option("--replay", vopts.replay_in, "Re-run the failures stored in a replay file");

  slp::cli::ClassifyArgs cargs;
  auto* classify = app.add_subcommand("classify", "Constructive or destructive interference");
  classify->add_option("--hj", cargs.h_j, "Channel row of user j, e.g. 1+2i,0.5-i")->required();
  classify->add_option("--wk", cargs.w_k, "Precoding vector of stream k")->required();
  classify->add_option("--dj", cargs.d_j, "Symbol index of user j")->required();
  classify->add_option("--dk", cargs.d_k, "Symbol index of user k")->required();
  classify->add_option("--order", cargs.order, "PSK order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? slp::cli::kOk : slp::cli::kUsageError;
  }

  if (*power) return slp::cli::cmd_sweep_power(power_config, power_flags, std::cout, std::cerr);
  if (*ee) return slp::cli::cmd_sweep_ee(ee_config, ee_flags, std::cout, std::cerr);
  if (*validate) return slp::cli::cmd_validate(vopts, std::cout, std::cerr);
  return slp::cli::cmd_classify(cargs, std::cout, std::cerr);
}

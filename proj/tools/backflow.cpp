#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "backflow/cli/commands.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kNumericalFailure = 2 };

}  // namespace

int main(int argc, char** argv) {
  using namespace backflow;

  CLI::App app{"Quantum backflow experiments: flux spectrum, smeared sweeps, gaussian and analytic states, "
               "complex-potential measurement."};
  std::string command;
  std::string config_path;
  std::string out_dir;
  app.add_option("command", command, "spectrum | sweep-smearing | gaussian | analytic-state | measure")
      ->required()
      ->check(CLI::IsMember(cli::command_names()));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory")->required();
  app.set_version_flag("--version", std::string(kVersion));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const auto echo = cli::load_json(config_path);
    std::string declared;
    const auto config = cli::parse_config(echo, &declared);
    if (declared != command)
      throw ConfigError("config declares command '" + declared + "' but '" + command + "' was requested");
    const auto summary = cli::run_command(command, config, echo, out_dir);
    std::fprintf(stderr, "%s: done in %.2f s, outputs in %s\n", command.c_str(),
                 summary["wall_clock_seconds"].get<double>(), out_dir.c_str());
    return kOk;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "invalid parameter: %s\n", e.what());
    return kConfigError;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumericalFailure;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumericalFailure;
  }
}

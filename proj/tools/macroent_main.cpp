// Command-line front end: macroent <command> --config PATH [overrides]

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "macroent/commands.hpp"
#include "macroent/errors.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{"Two-ensemble entanglement simulator"};
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::string> mode;
  std::optional<unsigned> threads;
  std::string out_dir;
  app.add_option("command", command, "params | fig2 | fig3 | lifetime | entangle")
      ->required()
      ->check(CLI::IsMember({"params", "fig2", "fig3", "lifetime", "entangle"}));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--seed", seed, "master seed (overrides monte_carlo.master_seed)");
  app.add_option("--runs", runs, "runs per point (overrides monte_carlo.n_runs)");
  app.add_option("--mode", mode, "analytic | waveform")
      ->check(CLI::IsMember({"analytic", "waveform"}));
  app.add_option("--threads", threads, "worker threads; output does not depend on this");
  app.add_option("--out", out_dir, "write the result into this directory instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto config = macroent::load_config(config_path);
  if (seed) config.monte_carlo.master_seed = *seed;
  if (runs) config.monte_carlo.n_runs = *runs;
  if (mode) config.monte_carlo.mode = macroent::parse_mc_mode(*mode);
  if (threads) config.monte_carlo.threads = *threads;
  if (!out_dir.empty()) config.output.directory = out_dir;
  config.validate();

  const std::map<std::string, std::string (*)(const macroent::RunConfig&)> commands = {
      {"params", macroent::cmd_params},     {"fig2", macroent::cmd_fig2},
      {"fig3", macroent::cmd_fig3},         {"lifetime", macroent::cmd_lifetime},
      {"entangle", macroent::cmd_entangle}};
  const std::string text = commands.at(command)(config);

  if (config.output.directory.empty()) {
    std::cout << text;
    return 0;
  }
  const std::filesystem::path dir(config.output.directory);
  std::filesystem::create_directories(dir);
  const auto path = dir / macroent::output_file_name(command, config.output.format);
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw macroent::ConfigError(fmt::format("cannot write '{}'", path.string()));
  std::cerr << "wrote " << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const macroent::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const macroent::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}

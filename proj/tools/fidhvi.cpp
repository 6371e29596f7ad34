#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fidhvi/cli.hpp"
#include "fidhvi/errors.hpp"

namespace {

int config_failure(const std::string& message) {
  const nlohmann::json j = {{"error", "config"}, {"message", message}, {"exit", 2}};
  std::cerr << j.dump() << "\n";
  return fidhvi::cli::kConfigError;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = fidhvi::cli;
  CLI::App app{"Fractional impulsive differential hemivariational inequalities"};
  std::string command;
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> nodes;
  std::optional<std::string> deltas;
  app.add_option("command", command, "check, solve, perturb, contact or bench")->required();
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "sampling seed");
  app.add_option("--nodes", nodes, "steps per subinterval");
  app.add_option("--deltas", deltas, "comma-separated perturbation sizes");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return config_failure(e.what());
  }

  cli::RunConfig config;
  try {
    config = cli::load_config(config_path);
    config.command = command;
    if (out) config.out_dir = *out;
    if (seed) config.seed = *seed;
    if (nodes) config.steps_per_subinterval = *nodes;
    if (deltas) config.deltas = cli::parse_number_list(*deltas);
    config.threads = cli::thread_budget();
  } catch (const fidhvi::ConfigError& e) {
    return config_failure(e.what());
  }
  return cli::run(config, std::cout, std::cerr);
}

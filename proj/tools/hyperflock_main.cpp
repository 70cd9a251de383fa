// hyperflock: consensus flows on implicit hypersurfaces.
//
//   hyperflock simulate|basin|check|classify|equivalence --config <path>
//              [--out <dir>] [--seed <u64>] [--state <path>] [--which <name>]
//
// Exit codes: 0 pass, 1 condition violated, 2 config error, 3 numerical
// failure, 4 supplied state is not an equilibrium.

#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hyperflock/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Consensus-seeking flows on implicit hypersurfaces"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string state_path;
  std::string which;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run configuration (JSON)")->required();
    cmd->add_option("--out", out_dir, "output directory (default: current)");
    cmd->add_option("--seed", seed, "override experiment.seed");
  };

  add_common(app.add_subcommand("simulate", "integrate one trajectory, emit CSV + summary"));
  add_common(app.add_subcommand("basin", "Monte Carlo estimate of the consensus basin"));
  auto* check = app.add_subcommand("check", "sample a surface condition (assumption1|convexity|alpha)");
  add_common(check);
  check->add_option("--which", which, "condition to check; defaults to experiment.which");
  auto* classify = app.add_subcommand("classify", "second-order report at an equilibrium");
  add_common(classify);
  classify->add_option("--state", state_path, "JSON file with {\"points\": [[...], ...]}");
  add_common(app.add_subcommand("equivalence",
                                "ellipsoid flow vs. unit-sphere flow under the Cholesky map"));

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  return hyperflock::run_command(command, config_path, out_dir, seed, state_path, which);
}

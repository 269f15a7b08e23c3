#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Lattice and zeta-regularized functional determinants"};
  app.require_subcommand(1);

  std::string config;
  gylab::cli::RunOptions opts;
  std::string which;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "INI problem configuration")->required();
    sub->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
    sub->add_flag("--no-timestamp", opts.no_timestamp, "Omit the timestamp field");
  };
  CLI::App* solve = app.add_subcommand("solve", "Discrete critical path");
  CLI::App* verify = app.add_subcommand("verify", "Check one determinant identity");
  CLI::App* converge = app.add_subcommand("converge", "Lattice sweep and extrapolation");
  add_common(solve);
  add_common(verify);
  add_common(converge);
  verify->add_option("--which", which, "Identity to check (overrides numerics.which)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return gylab::cli::kConfigFail;
  }
  if (!which.empty()) opts.which = which;

  const std::string command = solve->parsed() ? "solve" : verify->parsed() ? "verify" : "converge";
  return gylab::cli::run(command, config, opts, std::cerr);
}

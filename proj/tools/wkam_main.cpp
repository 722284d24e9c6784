#include <iostream>

#include "CLI11.hpp"
#include "wkam/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"weak KAM toolkit for u-dependent Hamilton-Jacobi equations"};
  app.require_subcommand(1);
  app.fallthrough();

  wkam::CommandOptions opts;
  std::string config, out;
  app.add_option("--config", config, "run configuration (JSON)")->required();
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--overwrite", opts.overwrite, "reuse a non-empty output directory");
  for (const auto& name : wkam::command_names()) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : wkam::kExitInvalid;
  }
  opts.config = config;
  opts.out = out;
  return wkam::run_command(app.get_subcommands().front()->get_name(), opts, std::cout, std::cerr);
}

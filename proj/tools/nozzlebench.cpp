#include "nozzle/error.hpp"
#include "nozzle/runner.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace nozzle::runner;

int main(int argc, char **argv) {
  CLI::App app{"Axisymmetric nozzle benchmark: mesh, solve, validate and report"};
  app.set_version_flag("--version", version_text());
  app.require_subcommand(1, 1);

  fs::path config_path;
  std::optional<fs::path> out;
  std::optional<int> order;
  std::optional<double> re;
  std::optional<std::string> driver, solver;
  bool print_config = false;

  for (const char *name : {"mesh", "run", "validate", "report", "all"}) {
    auto *sub = app.add_subcommand(name);
    sub->add_option("--config,-c", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out,-o", out, "Output directory (overrides output_dir)");
    sub->add_option("--order", order, "Pressure degree N (velocity N+1)");
    sub->add_option("--re", re, "Throat Reynolds number");
    sub->add_option("--driver", driver, "steady or transient");
    sub->add_option("--solver", solver, "direct or gmres+pcd");
    sub->add_flag("--print-config", print_config, "Echo the effective configuration");
  }
  app.footer("Exit codes: 0 ok, 1 config, 2 mesh, 3 solve, 4 validate, 5 io/dependency");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }
  const auto command = command_from_string(app.get_subcommands().front()->get_name());

  RunConfig config;
  try {
    config = parse_config(config_path);
    if (out)
      config.output_dir = fs::absolute(*out).lexically_normal();
    if (order)
      config.order = *order;
    if (re)
      config.re_throat = *re;
    if (driver)
      config.driver = *driver;
    if (solver)
      config.solver = *solver;
    validate(config);
  } catch (const nozzle::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::config;
  }
  if (print_config)
    std::cout << effective_config_json(config);
  return run_pipeline(config, command, std::cout, std::cerr);
}

#include <iostream>

#include "CLI11.hpp"
#include "bmet/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"B-MET simulator: equilibrium pricing, credit-weighted consensus, settlement"};
  app.require_subcommand(1);

  bmet::CliOptions opt;
  std::uint64_t seed = 0;
  for (const char* name : {"equilibrium", "consensus", "full"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--scenario", opt.scenario, "scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override the scenario seed");
    sub->add_flag("--trace", opt.trace, "also write per-node vote records");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? bmet::kExitOk : bmet::kExitValidation;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed")) opt.seed = seed;
  return bmet::run_command(sub->get_name(), opt, std::cout, std::cerr);
}

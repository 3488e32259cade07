#include "cdm/io.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Coupled lattice fracture and flow simulations"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "Run one configured simulation");
  run->add_option("config", config, "TOML configuration")->required();

  std::string dir_a;
  std::string dir_b;
  double tol = -1.0;
  cdm::CompareTolerances tols;
  auto* compare = app.add_subcommand("compare", "Compare the series of two run directories");
  compare->add_option("dirA", dir_a, "Reference run")->required();
  compare->add_option("dirB", dir_b, "Run to check")->required();
  compare->add_option("--tol", tol, "Relative tolerance for load and flux");
  compare->add_option("--tol-load", tols.load, "Relative tolerance for the load");
  compare->add_option("--tol-flux", tols.flux, "Relative tolerance for the flux");

  int n = 0;
  std::uint64_t seed_base = 0;
  auto* batch = app.add_subcommand("batch", "Run realizations over consecutive seeds");
  batch->add_option("config", config, "TOML configuration")->required();
  batch->add_option("--n", n, "Number of realizations")->required();
  batch->add_option("--seed-base", seed_base, "First seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cdm::kExitConfig;
  }

  if (*run) return cdm::run_command(config, std::cout);
  if (*compare) {
    if (tol >= 0.0) tols.load = tols.flux = tol;
    return cdm::compare_command(dir_a, dir_b, tols, std::cout);
  }
  return cdm::batch_command(config, n, seed_base, 0, std::cout);
}

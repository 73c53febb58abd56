// gnse: spectral Galerkin solver for the 2D time-fractional weighted
// Navier-Stokes system, with energy certificates and box-constrained
// tracking control.

#include <CLI11.hpp>

#include <iostream>

#include "gnse/commands.hpp"
#include "gnse/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"time-fractional g-Navier-Stokes: eigenbasis, forward solves, "
               "energy certificates, optimal control"};
  app.footer("configuration keys (INI format):\n" + gnse::config_reference());
  app.require_subcommand(1);

  std::string config_path, filter;

  auto* verify = app.add_subcommand("verify", "run the invariant suite and print a table");
  verify->add_option("--filter", filter, "only checks whose name contains this string");

  auto* eig = app.add_subcommand("eig", "compute the g-Stokes eigenbasis and H(g) verdict");
  eig->add_option("--config", config_path, "INI configuration file")->required();

  auto* solve = app.add_subcommand("solve", "integrate the Galerkin system and certify energy");
  solve->add_option("--config", config_path, "INI configuration file")->required();

  auto* control = app.add_subcommand("control", "projected-descent tracking control");
  control->add_option("--config", config_path, "INI configuration file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) return gnse::cmd_verify(filter, std::cout);
    const gnse::RunConfig rc = gnse::parse_config(config_path);
    if (eig->parsed()) return gnse::cmd_eig(rc, std::cout);
    if (solve->parsed()) return gnse::cmd_solve(rc, std::cout);
    if (control->parsed()) return gnse::cmd_control(rc, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

#include <CLI11.hpp>
#include <iostream>

#include "alb/experiment.hpp"
#include "alb/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"alb: spectral certificates for long-range lattice operators with alloy disorder"};
  app.set_version_flag("--version", alb::kVersion);
  app.require_subcommand(1);

  std::string spec_path;
  auto* run = app.add_subcommand("run", "execute an experiment spec file");
  run->add_option("spec", spec_path, "path to the JSON experiment spec")->required();

  std::string validate_path;
  auto* val = app.add_subcommand("validate", "check an experiment spec file without running it");
  val->add_option("spec", validate_path, "path to the JSON experiment spec")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return alb::cli::run_file(spec_path, std::cout);
  if (val->parsed()) return alb::cli::validate_file(validate_path, std::cout);
  return 1;
}

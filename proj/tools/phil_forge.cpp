#include <iostream>

#include <CLI11.hpp>

#include "phil/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"phil-forge: H-infinity PHIL interface synthesis and co-simulation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::string interface;
  double scr = 0.0;

  for (const char* name : {"synth", "validate", "simulate", "sweep", "compare"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out, "output directory (overrides output_dir)");
    sub->add_option("--interface", interface, "interface for simulate and sweep")
        ->check(CLI::IsMember({"hinf", "itm"}));
    sub->add_option("--scr", scr, "short-circuit ratio S (overrides scr)")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? phil::kExitOk : phil::kExitError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  phil::CommandContext ctx{phil::RunConfig{}, std::nullopt, &std::cerr};
  try {
    ctx.config = phil::load_config(config_path);
    if (!out.empty()) ctx.config.output_dir = out;
    if (scr > 0.0) ctx.config.scenario.scr = scr;
    if (!interface.empty()) ctx.interface = interface == "itm" ? phil::InterfaceKind::ITM : phil::InterfaceKind::HInf;
    ctx.config.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return phil::kExitError;
  }
  return phil::run_command(command, ctx);
}

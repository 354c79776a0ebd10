// arznet: junction solves, network runs and capacity-drop sweeps from JSON
// scenarios. See README.md for the scenario format.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arznet/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ARZ traffic networks: junction Riemann solvers and Godunov simulation"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir;
  double cfl = 0.0;
  double t_end = 0.0;
  std::size_t cells = 0;
  std::size_t grid = 512;
  std::vector<double> sweep = arznet::kDefaultSweep;
  bool direct = false;

  auto* solve = app.add_subcommand("solve", "Solve the scenario's single junction");
  solve->add_option("--scenario", scenario, "Scenario JSON")->required();

  auto* simulate = app.add_subcommand("simulate", "Run the Godunov scheme on the network");
  simulate->add_option("--scenario", scenario, "Scenario JSON")->required();
  simulate->add_option("--out", out_dir, "Output directory for CSV files")->required();
  auto* sim_cfl = simulate->add_option("--cfl", cfl, "CFL number in ]0,1]");
  auto* sim_t_end = simulate->add_option("--t-end", t_end, "Final time (h)");
  auto* sim_cells = simulate->add_option("--cells", cells, "Cells per road");

  auto* drop = app.add_subcommand("capacity-drop", "Sweep the desired flux of the second incoming road");
  drop->add_option("--scenario", scenario, "Base merge scenario")->required();
  auto* drop_out = drop->add_option("--out", out_dir, "Directory for capacity_drop.csv");
  drop->add_option("--sweep", sweep, "Desired fluxes (veh/h)")->delimiter(',');
  drop->add_flag("--direct", direct, "Solve the junction directly instead of simulating");
  auto* drop_cfl = drop->add_option("--cfl", cfl, "CFL number in ]0,1]");
  auto* drop_t_end = drop->add_option("--t-end", t_end, "Final time (h)");
  auto* drop_cells = drop->add_option("--cells", cells, "Cells per road");

  auto* pareto = app.add_subcommand("pareto-dump", "Grid sample of the merge's admissible flux set");
  pareto->add_option("--scenario", scenario, "Merge scenario")->required();
  pareto->add_option("--grid", grid, "Grid intervals per axis")->capture_default_str();
  auto* pareto_out = pareto->add_option("--out", out_dir, "Directory for pareto.csv (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : arznet::kExitUsage;
  }

  auto overrides = [&](CLI::Option* c, CLI::Option* t, CLI::Option* n) {
    arznet::SimOverrides o;
    if (c->count()) o.cfl = cfl;
    if (t->count()) o.t_end = t_end;
    if (n->count()) o.cells = cells;
    return o;
  };
  auto optional_dir = [&](CLI::Option* opt) -> std::optional<std::filesystem::path> {
    if (opt->count()) return std::filesystem::path(out_dir);
    return std::nullopt;
  };

  if (solve->parsed()) {
    return arznet::cmd_solve(scenario, std::cout, std::cerr);
  }
  if (simulate->parsed()) {
    return arznet::cmd_simulate(scenario, out_dir, overrides(sim_cfl, sim_t_end, sim_cells),
                                std::cout, std::cerr);
  }
  if (drop->parsed()) {
    return arznet::cmd_capacity_drop(scenario, optional_dir(drop_out), sweep, direct,
                                     overrides(drop_cfl, drop_t_end, drop_cells), std::cout,
                                     std::cerr);
  }
  return arznet::cmd_pareto_dump(scenario, grid, optional_dir(pareto_out), std::cout, std::cerr);
}

#include <iostream>

#include <CLI11.hpp>

#include "resest_cli/commands.hpp"

int main(int argc, char** argv) {
  namespace cli = resest::cli;
  CLI::App app{"resest: resilient distributed state estimation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "resest 0.1.0");

  std::string scenario;

  auto* audit = app.add_subcommand("audit", "Check the standing assumptions of a scenario");
  audit->add_option("scenario", scenario, "Scenario JSON file")->required();

  cli::MedianOptions med;
  std::string med_csv;
  auto* median = app.add_subcommand("median", "Run the distributed median solver");
  median->add_option("--z", med.z, "Local values z_i")->delimiter(',');
  median->add_option("--s", med.s, "Indicators s_i in {0,1}")->delimiter(',');
  median->add_option("--x0", med.x0, "Initial states (default 0)")->delimiter(',');
  median->add_option("--gamma", med.gamma, "Coupling gain")->capture_default_str();
  median->add_option("--topology", med.topology, "ring, complete, path or empty")->capture_default_str();
  median->add_option("--n", med.nodes, "Node count (default: number of values)");
  median->add_option("--horizon", med.horizon, "Simulated time (default: settling estimate)");
  median->add_option("--dt", med.dt, "RK4 step")->capture_default_str();
  median->add_option("--tail", med.tail_fraction, "Tail fraction of the horizon")->capture_default_str();
  median->add_option("--out", med_csv, "CSV output path, '-' for stdout (default $RESEST_OUT_DIR/median.csv)");

  cli::SimulateOptions sim;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Simulate a scenario and write the CSV log and JSON sidecar");
  simulate->add_option("scenario", scenario, "Scenario JSON file")->required();
  simulate->add_option("--out-dir", sim_out, "Output directory (default $RESEST_OUT_DIR or .)");
  simulate->add_flag("--force", sim.force, "Run even when the assumption audit fails");
  simulate->add_option("--dt", sim.dt, "Override the step size");
  simulate->add_option("--horizon", sim.horizon, "Override the horizon");
  simulate->add_option("--decimation", sim.decimation, "Log every k-th step");

  cli::BoundsOptions bnd;
  auto* bounds = app.add_subcommand("bounds", "Report lambda_2, the error bounds and plug-and-play gains");
  bounds->add_option("scenario", scenario, "Scenario JSON file")->required();
  bounds->add_option("--nbar", bnd.nbar, "Largest network size to design for");
  bounds->add_option("--sbar", bnd.sbar, "Target steady-state error");

  cli::SweepOptions swp;
  std::string swp_out;
  auto* sweep = app.add_subcommand("sweep", "Run a scenario over a grid of (kappa, gamma) in parallel");
  sweep->add_option("scenario", scenario, "Scenario JSON file")->required();
  sweep->add_option("--kappa", swp.kappas, "Kappa values")->delimiter(',');
  sweep->add_option("--gamma", swp.gammas, "Gamma values")->delimiter(',');
  sweep->add_option("--eta", swp.eta, "Target tail error; report the smallest gamma reaching it");
  sweep->add_option("--out-dir", swp_out, "Output directory (default $RESEST_OUT_DIR or .)");
  sweep->add_option("--jobs", swp.jobs, "Worker threads (default: all cores)");
  sweep->add_flag("--force", swp.force, "Run even when the assumption audit fails");
  sweep->add_flag("--logs", swp.write_logs, "Also write one CSV log per grid point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kOk : cli::kInputError;
  }

  if (audit->parsed()) return cli::cmd_audit(scenario, std::cout, std::cerr);
  if (median->parsed()) {
    if (!med_csv.empty()) med.csv = med_csv;
    return cli::cmd_median(med, std::cout, std::cerr);
  }
  if (simulate->parsed()) {
    sim.scenario = scenario;
    if (!sim_out.empty()) sim.out_dir = sim_out;
    return cli::cmd_simulate(sim, std::cout, std::cerr);
  }
  if (bounds->parsed()) {
    bnd.scenario = scenario;
    return cli::cmd_bounds(bnd, std::cout, std::cerr);
  }
  swp.scenario = scenario;
  if (!swp_out.empty()) swp.out_dir = swp_out;
  return cli::cmd_sweep(swp, std::cout, std::cerr);
}

#include <iostream>

#include <CLI11.hpp>

#include "bscusum/commands.hpp"
#include "bscusum/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bootstrap CUSUM charts with sprint-length-dependent control limits"};
  app.require_subcommand(1);

  bscusum::CalibrateOptions cal;
  auto* calibrate = app.add_subcommand("calibrate", "Estimate a control-limit schedule from Phase-I data");
  calibrate->add_option("--input,-i", cal.input, "Phase-I CSV file")->required();
  calibrate->add_option("--output,-o", cal.output, "Schedule file to write")->required();
  calibrate->add_option("--column", cal.column, "Zero-based CSV column");
  calibrate->add_option("--seed", cal.seed, "Random seed");
  calibrate->add_option("--arl0", cal.arl0, "Nominal in-control ARL");
  calibrate->add_option("--jmax", cal.j_max, "Number of sprint-length-specific limits");
  calibrate->add_option("--sprint-fraction", cal.sprint_fraction, "Target E[T_n] / j_max")
      ->check(CLI::IsMember({0.5, 0.75, 1.0}));
  calibrate->add_option("--boot-reps", cal.boot_reps, "Bootstrap sample size B");
  calibrate->add_option("--tune-reps", cal.tune_reps, "Runs per tuning evaluation");
  calibrate->add_option("--prewhiten", cal.prewhiten, "off | aic:<max_order> | fixed:<r>");
  calibrate->add_option("--threads", cal.threads, "Worker threads (0 = all cores)");

  bscusum::MonitorOptions mon;
  auto* monitor = app.add_subcommand("monitor", "Run a calibrated chart over a stream");
  monitor->add_option("--input,-i", mon.input, "CSV file, or - for standard input");
  monitor->add_option("--schedule,-s", mon.schedule, "Schedule file from calibrate")->required();
  monitor->add_option("--column", mon.column, "Zero-based CSV column");
  monitor->add_flag("--continue", mon.continue_after_signal, "Restart the CUSUM after a signal");
  monitor->add_option("--log", mon.log, "Write the per-step log here instead of standard output");
  monitor->add_option("--prewhiten", mon.prewhiten, "Require the schedule's AR model (any non-off value)");

  bscusum::SimulateOptions sim;
  std::string methods = "C,B2";
  double classical_k = -1.0;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run-length studies");
  simulate->add_option("--case", sim.case_name, "I, II or III");
  simulate->add_option("--methods", methods, "Comma-separated subset of C,NP1,NP2,B1,B2,B3");
  simulate->add_option("--delta", sim.delta, "Mean shift after the change point");
  simulate->add_option("--jmax", sim.j_max, "j_max for the bootstrap methods");
  simulate->add_option("--reps", sim.reps, "Replications I");
  simulate->add_option("--m", sim.m, "Phase-I size");
  simulate->add_option("--boot-reps", sim.boot_reps, "Bootstrap sample size B");
  simulate->add_option("--tune-reps", sim.tune_reps, "Runs per tuning evaluation");
  simulate->add_option("--arl0", sim.arl0, "Nominal in-control ARL");
  simulate->add_flag("--known-f", sim.known_f, "Bootstrap from the true F instead of Phase-I data");
  simulate->add_option("--classical-k", classical_k, "Allowance for C (default delta/2)");
  simulate->add_option("--seed", sim.seed, "Random seed");
  simulate->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");
  simulate->add_option("--long-format", sim.long_format, "Also write a long-format CSV here");
  simulate->add_flag("--table1", sim.table1, "Run the bootstrap validity study instead");
  simulate->add_option("--table1-series", sim.table1_series, "Series length n");
  simulate->add_option("--table1-reference", sim.table1_reference, "Direct-simulation draws per j");
  simulate->add_option("--table1-replications", sim.table1_replications, "Replications I");
  simulate->add_option("--table1-boot", sim.table1_boot, "Bootstrap draws B per replication");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(bscusum::ErrorKind::Usage);
  }

  try {
    if (calibrate->parsed()) {
      bscusum::cmd_calibrate(cal, std::cout);
    } else if (monitor->parsed()) {
      bscusum::cmd_monitor(mon, std::cin, std::cout);
    } else if (simulate->parsed()) {
      sim.methods.clear();
      std::size_t start = 0;
      while (start <= methods.size()) {
        const auto comma = methods.find(',', start);
        sim.methods.push_back(methods.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (classical_k >= 0.0) sim.classical_k = classical_k;
      bscusum::cmd_simulate(sim, std::cout);
    }
  } catch (const bscusum::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(bscusum::ErrorKind::Numerical);
  }
  return 0;
}

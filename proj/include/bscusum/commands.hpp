#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bscusum/prewhiten.hpp"

namespace bscusum {

/// --prewhiten {off | aic:<max_order> | fixed:<r>}
struct PrewhitenSpec {
  enum class Mode { Off, Aic, Fixed } mode = Mode::Off;
  std::size_t order = 0;

  static PrewhitenSpec parse(const std::string& text);
};

/// Fits the AR model requested by `spec` (nullopt for Off).
std::optional<ArModel> fit_prewhitening(const std::vector<double>& series, const PrewhitenSpec& spec);

struct CalibrateOptions {
  std::string input;
  std::string output;
  std::size_t column = 0;
  std::uint64_t seed = 1;
  double arl0 = 200.0;
  std::size_t j_max = 50;
  double sprint_fraction = 0.75;
  std::size_t boot_reps = 2000;
  std::size_t tune_reps = 100;
  std::string prewhiten = "off";
  unsigned threads = 0;
};

struct MonitorOptions {
  std::string input = "-";  // "-" reads standard input
  std::string schedule;
  std::size_t column = 0;
  bool continue_after_signal = false;
  std::string log;          // per-step log path; empty writes it to `out`
  std::string prewhiten;    // overrides the schedule's AR model when set
};

struct SimulateOptions {
  std::string case_name = "I";
  std::vector<std::string> methods{"C", "B2"};
  double delta = 0.0;
  std::size_t j_max = 50;
  std::size_t reps = 100;
  std::size_t m = 1000;
  std::size_t boot_reps = 2000;
  std::size_t tune_reps = 100;
  double arl0 = 200.0;
  bool known_f = false;
  std::optional<double> classical_k;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string long_format;  // optional output path

  bool table1 = false;
  std::size_t table1_series = 10'000;
  std::size_t table1_reference = 10'000;
  std::size_t table1_replications = 200;
  std::size_t table1_boot = 500;
};

/// Each command writes its report to `out` and throws bscusum::Error on failure.
void cmd_calibrate(const CalibrateOptions& opts, std::ostream& out);
void cmd_monitor(const MonitorOptions& opts, std::istream& in, std::ostream& out);
void cmd_simulate(const SimulateOptions& opts, std::ostream& out);

}  // namespace bscusum

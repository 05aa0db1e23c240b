#include "bscusum/commands.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>

#include "bscusum/calibration.hpp"
#include "bscusum/csv.hpp"
#include "bscusum/error.hpp"
#include "bscusum/experiments.hpp"
#include "bscusum/monitor.hpp"
#include "bscusum/schedule_io.hpp"

namespace bscusum {

namespace {

std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DistributionKind parse_case(const std::string& name) {
  if (name == "I") return DistributionKind::StandardNormal;
  if (name == "II") return DistributionKind::RightSkewMix;
  if (name == "III") return DistributionKind::LeftSkewMix;
  throw UsageError("unknown case '" + name + "' (expected I, II or III)");
}

}  // namespace

PrewhitenSpec PrewhitenSpec::parse(const std::string& text) {
  if (text.empty() || text == "off") return {};
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("--prewhiten expects off, aic:<max_order> or fixed:<r>");
  const std::string mode = text.substr(0, colon);
  const std::string num = text.substr(colon + 1);
  std::size_t order = 0;
  const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), order);
  if (ec != std::errc{} || ptr != num.data() + num.size() || num.empty())
    throw UsageError("--prewhiten: invalid order '" + num + "'");
  if (mode == "aic") return {Mode::Aic, order};
  if (mode == "fixed") return {Mode::Fixed, order};
  throw UsageError("--prewhiten expects off, aic:<max_order> or fixed:<r>");
}

std::optional<ArModel> fit_prewhitening(const std::vector<double>& series, const PrewhitenSpec& spec) {
  switch (spec.mode) {
    case PrewhitenSpec::Mode::Off: return std::nullopt;
    case PrewhitenSpec::Mode::Aic: return yule_walker_fit(series, select_order_aic(series, spec.order));
    case PrewhitenSpec::Mode::Fixed: return yule_walker_fit(series, spec.order);
  }
  return std::nullopt;
}

void cmd_calibrate(const CalibrateOptions& opts, std::ostream& out) {
  if (opts.input.empty() || opts.output.empty()) throw UsageError("calibrate: --input and --output are required");
  if (!(opts.sprint_fraction == 0.5 || opts.sprint_fraction == 0.75 || opts.sprint_fraction == 1.0))
    throw UsageError("--sprint-fraction must be 0.5, 0.75 or 1.0");
  const auto raw = read_column_file(opts.input, opts.column);

  // The AR model is fitted on the Phase-I segment only; calibration then uses its residuals.
  const auto ar = fit_prewhitening(raw, PrewhitenSpec::parse(opts.prewhiten));
  const std::vector<double> data = ar ? residuals(raw, *ar) : raw;

  CalibrationConfig cfg;
  cfg.arl0 = opts.arl0;
  cfg.j_max = opts.j_max;
  cfg.target_sprint = opts.sprint_fraction * static_cast<double>(opts.j_max);
  cfg.boot_reps = opts.boot_reps;
  cfg.tune_reps = opts.tune_reps;
  cfg.seed = opts.seed;
  cfg.threads = opts.threads;
  const auto result = calibrate(data, cfg);

  ScheduleFile file;
  file.center = result.phase1.mean;
  file.scale = result.phase1.sd;
  file.k = result.schedule.k();
  file.limits.assign(result.schedule.limits().begin(), result.schedule.limits().end());
  file.h_star = result.schedule.h_star();
  file.arl0 = opts.arl0;
  file.created_with_seed = opts.seed;
  file.phase1_fingerprint = fingerprint(raw);
  file.ar_model = ar;
  write_schedule_file(opts.output, file);

  out << "k = " << fmt(file.k) << " (standardized units; center " << fmt_g(file.center) << ", scale "
      << fmt_g(file.scale) << ")\n"
      << "j_max = " << file.j_max() << '\n'
      << "achieved RL = " << fmt(result.tuning.achieved_rl, 2) << " (target " << fmt(opts.arl0, 2) << ")\n"
      << "tuning iterations = " << result.tuning.iterations << '\n'
      << "k search iterations = " << result.k_selection.iterations
      << (result.k_selection.at_bound ? " (warning: target sprint length unreachable, k at quartile bound)" : "")
      << '\n';
  if (ar) out << "prewhitening AR order = " << ar->order << '\n';
  out << "schedule written to " << opts.output << '\n';
}

void cmd_monitor(const MonitorOptions& opts, std::istream& in, std::ostream& out) {
  if (opts.schedule.empty()) throw UsageError("monitor: --schedule is required");
  const ScheduleFile file = read_schedule_file(opts.schedule);
  std::optional<ArModel> ar = file.ar_model;
  if (!opts.prewhiten.empty() && PrewhitenSpec::parse(opts.prewhiten).mode != PrewhitenSpec::Mode::Off && !ar)
    throw UsageError("monitor: --prewhiten needs a schedule calibrated with an AR model");

  std::ifstream file_in;
  std::istream* source = &in;
  if (opts.input != "-") {
    file_in.open(opts.input);
    if (!file_in) throw DataError("cannot open input file '" + opts.input + "'");
    source = &file_in;
  }
  std::ofstream log_file;
  std::ostream* log = &out;
  if (!opts.log.empty()) {
    log_file.open(opts.log);
    if (!log_file) throw DataError("cannot open log file '" + opts.log + "'");
    log = &log_file;
  }

  Monitor monitor(file.schedule(), ar, opts.continue_after_signal, file.center, file.scale);
  CsvColumnReader reader(*source, opts.column);
  *log << "observation,n,x,value,c,t,limit,signal\n";
  while (!monitor.stopped()) {
    const auto x = reader.next();
    if (!x) break;
    const auto step = monitor.push(*x);
    if (!step) continue;
    *log << step->observation << ',' << step->n << ',' << fmt_g(step->x) << ',' << fmt_g(step->value) << ','
         << fmt_g(step->c) << ',' << step->t << ',' << fmt_g(step->limit) << ',' << (step->signal ? 1 : 0) << '\n';
  }
  if (monitor.observations() <= monitor.warmup())
    throw DataError("monitor: AR order " + std::to_string(monitor.warmup()) + " exceeds the available history (" +
                    std::to_string(monitor.observations()) + " observations)");

  if (monitor.signals().empty()) {
    out << "# no signal in " << monitor.observations() << " observations\n";
    return;
  }
  for (const auto& s : monitor.signals())
    out << "# signal at n=" << s.n << " (observation " << s.observation << ") C=" << fmt(s.c) << " T=" << s.t
        << " limit=" << fmt(s.limit) << '\n';
}

void cmd_simulate(const SimulateOptions& opts, std::ostream& out) {
  if (opts.table1) {
    ValidityConfig cfg;
    cfg.series_length = opts.table1_series;
    cfg.reference_reps = opts.table1_reference;
    cfg.replications = opts.table1_replications;
    cfg.boot_reps = opts.table1_boot;
    cfg.seed = opts.seed;
    cfg.threads = opts.threads;
    const auto result = bootstrap_validity_study(cfg);
    out << "j\tp_value_percent\n";
    for (std::size_t j = 0; j < result.uniformity_p.size(); ++j)
      out << j + 1 << '\t' << fmt(100.0 * result.uniformity_p[j], 2) << '\n';
    return;
  }

  std::vector<Method> methods;
  for (const auto& name : opts.methods) {
    const auto m = parse_method(name);
    if (!m) throw UsageError("unknown method '" + name + "' (expected C, NP1, NP2, B1, B2, B3)");
    methods.push_back(*m);
  }
  ExperimentConfig cfg;
  cfg.kind = parse_case(opts.case_name);
  cfg.delta = opts.delta;
  cfg.m = opts.m;
  cfg.reps = opts.reps;
  cfg.j_max = opts.j_max;
  cfg.arl0 = opts.arl0;
  cfg.seed = opts.seed;
  cfg.boot_reps = opts.boot_reps;
  cfg.tune_reps = opts.tune_reps;
  cfg.known_f = opts.known_f;
  cfg.classical_k = opts.classical_k;
  cfg.threads = opts.threads;
  const auto table = arl_table(cfg, methods);
  write_table(out, table);
  if (!opts.long_format.empty()) {
    std::ofstream lf(opts.long_format);
    if (!lf) throw DataError("cannot open '" + opts.long_format + "' for writing");
    write_long_format(lf, std::span<const ArlTable>(&table, 1));
  }
}

}  // namespace bscusum

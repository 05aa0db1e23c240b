// Acceptance run: one PASS/FAIL line per criterion, detail lines indented.
// Usage: acceptance [criterion numbers...]; no arguments runs all seven.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bscusum/calibration.hpp"
#include "bscusum/distributions.hpp"
#include "bscusum/experiments.hpp"
#include "bscusum/schedule_io.hpp"

using namespace bscusum;
namespace fs = std::filesystem;

namespace {

[[gnu::format(printf, 1, 2)]] void detail(const char* fmt, ...) {
  std::printf("    ");
  va_list args;
  va_start(args, fmt);
  std::vprintf(fmt, args);
  va_end(args);
  std::printf("\n");
  std::fflush(stdout);
}

struct Reference {
  double arl;
  double se;
};

// |observed - reference| <= 2 * max(reference SE, observed SE)
bool within_two_se(const char* label, const RunLengthSummary& got, Reference ref) {
  const double tol = 2.0 * std::max(ref.se, got.se);
  const bool ok = std::abs(got.mean - ref.arl) <= tol;
  detail("%-28s %8.2f (%6.2f)  ref %8.2f (%6.2f)  |diff| %7.2f  tol %6.2f  %s", label, got.mean, got.se, ref.arl,
         ref.se, std::abs(got.mean - ref.arl), tol, ok ? "ok" : "MISS");
  return ok;
}

const DistributionKind kCases[] = {DistributionKind::StandardNormal, DistributionKind::RightSkewMix,
                                   DistributionKind::LeftSkewMix};
const char* kCaseNames[] = {"I", "II", "III"};

// 1. Known-F in-control ARL
bool criterion_known_f() {
  const Reference boot[] = {{201.16, 6.19}, {207.11, 6.19}, {194.79, 6.19}};
  bool ok = true;
  double classical[3] = {};
  for (int c = 0; c < 3; ++c) {
    ExperimentConfig cfg;
    cfg.kind = kCases[c];
    cfg.delta = 0.0;
    cfg.known_f = true;
    cfg.j_max = 50;
    cfg.reps = 1000;
    cfg.tune_reps = 2000;
    cfg.classical_k = 0.25;
    const std::vector<Method> ms{Method::C, Method::B2};
    const auto t = arl_table(cfg, ms);
    detail("case %s: k = %.4f", kCaseNames[c], t.row(Method::B2).k_values.front());
    const std::string label = std::string("case ") + kCaseNames[c] + " bootstrap";
    ok &= within_two_se(label.c_str(), t.row(Method::B2).summary, boot[c]);
    classical[c] = t.row(Method::C).summary.mean;
    detail("case %s classical k=0.25     %8.2f (%6.2f)", kCaseNames[c], classical[c], t.row(Method::C).summary.se);
  }
  const bool skew_ii = classical[1] > 500.0;
  const bool skew_iii = classical[2] < 150.0;
  detail("classical case II > 500: %s   case III < 150: %s", skew_ii ? "ok" : "MISS", skew_iii ? "ok" : "MISS");
  if (!skew_ii && !skew_iii && classical[1] < 150.0 && classical[2] > 500.0)
    detail("note: the classical failure appears mirrored (II low, III high) under the densities used here");
  return ok && skew_ii && skew_iii;
}

// 2. Estimated-F spot checks
bool criterion_estimated_f() {
  bool ok = true;
  auto table = [](int c, double delta, std::size_t j_max, std::vector<Method> ms) {
    ExperimentConfig cfg;
    cfg.kind = kCases[c];
    cfg.delta = delta;
    cfg.j_max = j_max;
    cfg.m = 1000;
    cfg.reps = 100;
    return arl_table(cfg, ms);
  };
  {
    const auto t = table(0, 0.0, 30, {Method::C, Method::NP1, Method::B2});
    ok &= within_two_se("case I B2 j_max=30 delta=0", t.row(Method::B2).summary, {194.44, 18.86});
    ok &= within_two_se("case I C delta=0", t.row(Method::C).summary, {206.96, 25.86});
    ok &= within_two_se("case I NP1 delta=0", t.row(Method::NP1).summary, {140.30, 13.49});
  }
  {
    const auto t = table(1, 1.0, 5, {Method::B2});
    ok &= within_two_se("case II B2 j_max=5 delta=1", t.row(Method::B2).summary, {23.27, 1.53});
    // Diagnostic only: the same cell with delta read as a shift in raw units.
    const double raw_sd = standardization_constants(DistributionKind::RightSkewMix).sd;
    const auto raw = table(1, 1.0 / raw_sd, 5, {Method::B2});
    detail("  (diagnostic, shift 1/sd = %.3f sd: %.2f (%.2f), not scored)", 1.0 / raw_sd,
           raw.row(Method::B2).summary.mean, raw.row(Method::B2).summary.se);
    const auto t0 = table(1, 0.0, 5, {Method::C, Method::NP1});
    ok &= within_two_se("case II C delta=0", t0.row(Method::C).summary, {258.96, 28.76});
    ok &= within_two_se("case II NP1 delta=0", t0.row(Method::NP1).summary, {656.90, 67.97});
  }
  {
    const auto t = table(2, 0.0, 5, {Method::C, Method::NP1});
    ok &= within_two_se("case III C delta=0", t.row(Method::C).summary, {232.61, 24.16});
    ok &= within_two_se("case III NP1 delta=0", t.row(Method::NP1).summary, {51.50, 4.62});
  }
  return ok;
}

// 3. Bootstrap validity of the conditional distributions
bool criterion_validity() {
  ValidityConfig cfg;
  const auto r = bootstrap_validity_study(cfg);
  int above = 0;
  for (std::size_t j = 0; j < r.uniformity_p.size(); ++j) {
    detail("j = %2zu  p = %6.2f%%", j + 1, 100.0 * r.uniformity_p[j]);
    above += r.uniformity_p[j] > 0.01;
  }
  detail("%d of %zu p-values exceed 0.01 (need >= 9)", above, r.uniformity_p.size());
  return r.uniformity_p.size() == 10 && above >= 9;
}

// 4. Allowance selection
bool criterion_select_k() {
  const DistributionModel f(DistributionKind::StandardNormal);
  const double targets[] = {25.0, 37.5, 50.0};
  const double reference[] = {0.028, 0.017, 0.011};
  bool ok = true;
  for (int i = 0; i < 3; ++i) {
    CalibrationConfig cfg;
    cfg.j_max = 50;
    cfg.target_sprint = targets[i];
    const auto sel = select_k(f, quartile_bounds(f), cfg);
    const bool hit = std::abs(sel.k - reference[i]) <= 0.01;
    detail("target E[T] = %4.1f  k = %.4f  ref %.3f  est E[T] = %.2f  iters %zu  %s", targets[i], sel.k,
           reference[i], sel.estimated_sprint, sel.iterations, hit ? "ok" : "MISS");
    ok &= hit;
  }
  return ok;
}

// 5. Tuning convergence
bool criterion_tuning() {
  bool ok = true;
  for (int c = 0; c < 3; ++c) {
    CalibrationConfig cfg;
    const DistributionModel f(kCases[c]);
    const auto known = calibrate_known(f, cfg);
    const auto data = sample_stream(f, {}, 1000, derive_seed(cfg.seed, {static_cast<std::uint64_t>(c)}));
    const auto est = calibrate(data, cfg);
    for (const auto* tr : {&known.tuning, &est.tuning}) {
      const double rel = std::abs(tr->achieved_rl - cfg.arl0) / cfg.arl0;
      const bool hit = tr->iterations <= 15 && rel < 0.02;
      detail("case %-3s %-9s RL %7.2f  rel %.4f  iterations %2zu  %s", kCaseNames[c],
             tr == &known.tuning ? "known F" : "Phase I", tr->achieved_rl, rel, tr->iterations, hit ? "ok" : "MISS");
      ok &= hit;
    }
  }
  return ok;
}

struct Run {
  int code;
  std::string output;
};

Run run(const std::string& cmd) {
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf{};
  while (const auto n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string env(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

// 6. Property suites
bool criterion_properties() {
  const auto bin = env("BSCUSUM_PROPERTIES");
  if (bin.empty()) {
    detail("BSCUSUM_PROPERTIES is not set");
    return false;
  }
  const auto r = run(bin);
  std::istringstream in(r.output);
  for (std::string line; std::getline(in, line);)
    if (line.find("test cases:") != std::string::npos || line.find("assertions:") != std::string::npos ||
        line.find("ERROR") != std::string::npos)
      detail("%s", line.c_str());
  return r.code == 0;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 7. Determinism across thread counts
bool criterion_determinism() {
  bool ok = true;
  auto check = [&](const char* what, bool same) {
    detail("%-44s %s", what, same ? "identical" : "DIFFERS");
    ok &= same;
  };

  ExperimentConfig cfg;
  cfg.kind = DistributionKind::LeftSkewMix;
  cfg.delta = 0.5;
  cfg.reps = 12;
  cfg.j_max = 10;
  cfg.boot_reps = 400;
  cfg.tune_reps = 60;
  const std::vector<Method> all{Method::C, Method::NP1, Method::NP2, Method::B1, Method::B2, Method::B3};
  std::string tables[3];
  const unsigned thread_counts[] = {1, 2, 5};
  for (int i = 0; i < 3; ++i) {
    cfg.threads = thread_counts[i];
    std::ostringstream out;
    const std::vector<ArlTable> one{arl_table(cfg, all)};
    write_long_format(out, one);
    for (const auto& row : one.front().rows)
      for (const auto& r : row.runs) out << r.length << (r.truncated ? "t " : " ");
    tables[i] = out.str();
  }
  check("arl_table, threads 1/2/5", tables[0] == tables[1] && tables[0] == tables[2]);

  ValidityConfig vc;
  vc.series_length = 800;
  vc.reference_reps = 800;
  vc.replications = 8;
  vc.boot_reps = 100;
  vc.threads = 1;
  const auto v1 = bootstrap_validity_study(vc);
  vc.threads = 4;
  const auto v4 = bootstrap_validity_study(vc);
  check("bootstrap validity study, threads 1/4", v1.uniformity_p == v4.uniformity_p && v1.replicate_p == v4.replicate_p);

  CalibrationConfig cc;
  const auto data = sample_stream(DistributionModel(DistributionKind::RightSkewMix), {}, 1000, 77);
  cc.threads = 1;
  const auto c1 = calibrate(data, cc);
  cc.threads = 4;
  const auto c4 = calibrate(data, cc);
  check("calibrate, threads 1/4", c1.schedule == c4.schedule && c1.tuning.achieved_rl == c4.tuning.achieved_rl);

  const auto cli = env("BSCUSUM_CLI");
  if (cli.empty()) {
    detail("BSCUSUM_CLI is not set");
    return false;
  }
  const auto dir = fs::temp_directory_path() / ("bscusum_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  {
    std::ofstream p1(dir / "phase1.csv"), p2(dir / "phase2.csv");
    p1.precision(17);
    p2.precision(17);
    for (double x : data) p1 << x << '\n';
    for (double x : sample_stream(DistributionModel(DistributionKind::RightSkewMix), {1.0, 100}, 400, 78))
      p2 << x << '\n';
  }
  const std::string in1 = (dir / "phase1.csv").string(), in2 = (dir / "phase2.csv").string();
  std::string sched[2], report[2], mon[2], sim[2], long_fmt[2], table1[2];
  const unsigned cli_threads[] = {1, 4};
  for (int i = 0; i < 2; ++i) {
    const std::string t = " --threads " + std::to_string(cli_threads[i]);
    const auto s = dir / ("s" + std::to_string(i) + ".txt");
    const auto lf = dir / ("long" + std::to_string(i) + ".csv");
    const auto rc = run(cli + " calibrate -i " + in1 + " -o " + s.string() + " --seed 5 --prewhiten aic:4" + t);
    report[i] = rc.output.substr(0, rc.output.find("schedule written"));
    sched[i] = slurp(s);
    const auto rm = run(cli + " monitor --continue -s " + s.string() + " -i " + in2);
    const auto rs = run(cli + " simulate --case II --methods C,NP2,B1,B3 --delta 1 --reps 8 --jmax 8 --boot-reps 300 "
                              "--tune-reps 60 --seed 3 --long-format " + lf.string() + t);
    const auto rt = run(cli + " simulate --table1 --table1-series 600 --table1-reference 600 --table1-replications 6 "
                              "--table1-boot 80" + t);
    mon[i] = rm.output;
    sim[i] = rs.output;
    long_fmt[i] = slurp(lf);
    table1[i] = rt.output;
    for (const auto* r : {&rc, &rm, &rs, &rt})
      if (r->code != 0) {
        detail("command exited with %d: %s", r->code, r->output.c_str());
        ok = false;
      }
  }
  check("cli calibrate (schedule file and report)", !sched[0].empty() && sched[0] == sched[1] && report[0] == report[1]);
  check("cli monitor", !mon[0].empty() && mon[0] == mon[1]);
  check("cli simulate table and long format", sim[0] == sim[1] && !long_fmt[0].empty() && long_fmt[0] == long_fmt[1]);
  check("cli simulate --table1", table1[0] == table1[1]);
  fs::remove_all(dir);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<bool()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "known-F in-control ARL (bootstrap and classical)", criterion_known_f},
      {2, "estimated-F ARL spot checks", criterion_estimated_f},
      {3, "bootstrap validity of conditional distributions", criterion_validity},
      {4, "allowance selection", criterion_select_k},
      {5, "limit tuning convergence", criterion_tuning},
      {6, "property suites", criterion_properties},
      {7, "determinism across thread counts", criterion_determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.contains(c.id)) continue;
    std::printf("criterion %d: %s\n", c.id, c.name);
    std::fflush(stdout);
    const auto start = std::chrono::steady_clock::now();
    bool pass = false;
    try {
      pass = c.run();
    } catch (const std::exception& e) {
      detail("exception: %s", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %d %s (%.1f s)\n", pass ? "PASS" : "FAIL", c.id, c.name, secs);
    std::fflush(stdout);
    failed += !pass;
  }
  return failed == 0 ? 0 : 1;
}

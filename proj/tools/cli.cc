#include "cli.h"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "reachsdp/certificate_io.h"
#include "reachsdp/certify.h"
#include "reachsdp/grid_file.h"
#include "reachsdp/problem_file.h"
#include "reachsdp/relaxation.h"
#include "reachsdp/report_io.h"

namespace reachsdp::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kBenchmarks[] = {"toy", "cathala", "fitzhugh_nagumo", "julia",
                                       "phytoplankton"};

// Exit statuses.
constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kFailed = 1;
constexpr int kCheckFailed = 3;

struct Error {
  std::string kind;
  std::string message;
  std::vector<std::string> details;
};

void EmitError(std::ostream& err, const Error& e) {
  nlohmann::ordered_json rec;
  rec["error"]["kind"] = e.kind;
  rec["error"]["message"] = e.message;
  if (!e.details.empty()) rec["error"]["details"] = e.details;
  err << rec.dump() << '\n';
}

struct CommonSolve {
  std::optional<int> order;
  std::optional<int> horizon;
  bool u_zero = false;
  std::string backend = "builtin";
  int threads = 0;
  bool verbose = false;
  bool timing = false;
};

struct CommonCertify {
  int samples = 1000;
  int steps = 7;
  int volume_samples = 100000;
  std::optional<std::uint64_t> seed;
};

void AddSolveFlags(CLI::App* cmd, CommonSolve& s) {
  auto* t = cmd->add_option("--T", s.horizon, "horizon T for the u·T term")
                ->check(CLI::PositiveNumber);
  cmd->add_flag("--u-zero", s.u_zero, "impose u = 0")->excludes(t);
  cmd->add_option("--backend", s.backend, "SDP backend");
  cmd->add_option("--threads", s.threads, "worker threads (0: REACH_SOS_THREADS or all)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--verbose", s.verbose, "log solver iterations to stderr");
  cmd->add_flag("--timing", s.timing, "record runtimes in reports");
}

void AddCertifyFlags(CLI::App* cmd, CommonCertify& c) {
  cmd->add_option("--samples", c.samples, "initial points for containment")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--steps", c.steps, "simulation steps")->check(CLI::NonNegativeNumber);
  cmd->add_option("--volume-samples", c.volume_samples, "samples for the volume estimate")
      ->check(CLI::Range(10000, 100000000));
  cmd->add_option("--seed", c.seed, "base seed (overrides the problem file)");
}

LoadedProblem Load(const std::string& path, const CommonSolve& s, std::ostream& log) {
  LoadedProblem lp = LoadProblem(path);
  if (s.u_zero) {
    lp.problem.u_zero = true;
  } else if (s.horizon) {
    lp.problem.u_zero = false;
    lp.problem.horizon = *s.horizon;
  }
  for (const auto& note : lp.notes) log << "note: " << note << '\n';
  return lp;
}

SolverOptions Solver(const LoadedProblem& lp, const CommonSolve& s, std::ostream& err) {
  SolverOptions o = lp.options.Solver();
  o.threads = s.threads;
  if (s.verbose) {
    o.verbosity = 1;
    o.log = &err;
  }
  return o;
}

CertifyOptions Certifying(const LoadedProblem& lp, const CommonCertify& c) {
  CertifyOptions o;
  o.samples = c.samples;
  o.steps = c.steps;
  o.volume_samples = c.volume_samples;
  o.seed = c.seed.value_or(lp.options.seed);
  return o;
}

int OrderFor(const LoadedProblem& lp, const CommonSolve& s) {
  const int order = s.order.value_or(
      lp.options.order.value_or(2 * lp.problem.MinRelaxationOrder()));
  if (order < 2 || order % 2 != 0) {
    throw std::invalid_argument("--order must be an even number >= 2, got " +
                                std::to_string(order));
  }
  return order;
}

void PrintSummary(std::ostream& out, const CertReport& r) {
  out << r.problem << " order " << r.order << ": " << r.status;
  if (!r.solved()) {
    out << " (" << r.error << ")\n";
    return;
  }
  out << ", u = " << FormatDouble(r.u) << ", objective = " << FormatDouble(r.objective)
      << ", containment violations " << r.containment.violations << '/'
      << r.containment.points << ", volume " << FormatDouble(r.volume.estimate) << " ± "
      << FormatDouble(r.volume.half_width) << '\n';
}

void WriteGridFile(const fs::path& path, const Certificate& cert, int res) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  WriteGrid(f, cert, GridSpec::Default(cert, res));
}

// Solves one order and certifies the result; solver failures become report
// rows instead of exceptions.
SweepRow SolveAndCertify(const LoadedProblem& lp, int order, const SdpBackend& backend,
                         const SolverOptions& so, const CertifyOptions& co, bool timing) {
  SweepOptions opts;
  opts.certify = co;
  opts.solver = so;
  opts.backend = backend.name();
  opts.record_runtime = timing;
  SweepRow row = std::move(RunOrderSweep(lp.problem, {order}, opts).rows.front());
  if (row.certificate) row.certificate->problem_hash = ProblemHash(lp.problem);
  return row;
}

int CmdSolve(const std::string& problem, const CommonSolve& s, const CommonCertify& c,
             const std::string& out_path, const std::string& report_path,
             std::ostream& out, std::ostream& err) {
  const LoadedProblem lp = Load(problem, s, err);
  const int order = OrderFor(lp, s);
  const auto backend = MakeBackend(s.backend);
  const CertifyOptions co = Certifying(lp, c);
  SweepRow row = SolveAndCertify(lp, order, *backend, Solver(lp, s, err), co, s.timing);
  const std::string stem = lp.problem.name + "_order" + std::to_string(order);
  const fs::path cert_file = out_path.empty() ? fs::path(stem + ".cert.json") : fs::path(out_path);
  const fs::path report_file =
      report_path.empty() ? fs::path(stem + ".report.json") : fs::path(report_path);
  SaveReport(report_file, {row.report});
  PrintSummary(out, row.report);
  if (!row.certificate) {
    EmitError(err, {"solve_failed", row.report.error, {}});
    return kFailed;
  }
  SaveCertificate(cert_file, *row.certificate);
  out << "certificate: " << cert_file.string() << "\nreport: " << report_file.string()
      << '\n';
  return kOk;
}

int CmdCertify(const std::string& problem, const std::string& cert_path,
               const CommonCertify& c, const std::string& report_path, std::ostream& out,
               std::ostream& err) {
  const LoadedProblem lp = Load(problem, {}, err);
  const Certificate cert = LoadCertificate(cert_path);
  if (!cert.problem_hash.empty() && cert.problem_hash != ProblemHash(lp.problem)) {
    // The horizon is part of the hash; compare against the certificate's.
    ReachProblem as_solved = lp.problem;
    as_solved.u_zero = cert.u_zero;
    as_solved.horizon = cert.horizon;
    if (cert.problem_hash != ProblemHash(as_solved)) {
      throw std::invalid_argument("certificate was computed for a different problem (hash " +
                                  cert.problem_hash + ")");
    }
  }
  if (cert.n_vars() != lp.problem.n_vars()) {
    throw std::invalid_argument("certificate and problem disagree on the number of variables");
  }
  CertReport rep = Certify(lp.problem, cert, Certifying(lp, c));
  if (!report_path.empty()) SaveReport(report_path, {rep});
  PrintSummary(out, rep);
  return rep.containment.passed() ? kOk : kCheckFailed;
}

int CmdGrid(const std::string& cert_path, int res, const std::string& out_path,
            const std::vector<int>& axes, std::ostream& out) {
  const Certificate cert = LoadCertificate(cert_path);
  GridSpec spec = GridSpec::Default(cert, res);
  if (!axes.empty()) {
    spec.axes = axes;
    const int k = static_cast<int>(axes.size());
    spec.lower.resize(k);
    spec.upper.resize(k);
    for (int a = 0; a < k; ++a) {
      if (axes[a] < 0 || axes[a] >= cert.n_vars()) {
        throw std::invalid_argument("--axes index out of range");
      }
      spec.lower[a] = cert.state_box.lower[axes[a]];
      spec.upper[a] = cert.state_box.upper[axes[a]];
    }
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out_path);
  WriteGrid(f, cert, spec);
  out << "grid: " << out_path << " (" << spec.rows() << " rows)\n";
  return kOk;
}

int CmdSweep(const std::string& problem, const std::vector<int>& orders,
             const CommonSolve& s, const CommonCertify& c, const std::string& out_dir,
             int res, std::ostream& out, std::ostream& err) {
  const LoadedProblem lp = Load(problem, s, err);
  SweepOptions opts;
  opts.certify = Certifying(lp, c);
  opts.solver = Solver(lp, s, err);
  opts.backend = s.backend;
  opts.record_runtime = s.timing;
  SweepResult result = RunOrderSweep(lp.problem, orders, opts);
  fs::create_directories(out_dir);
  std::vector<CertReport> reports;
  const std::string hash = ProblemHash(lp.problem);
  for (auto& row : result.rows) {
    PrintSummary(out, row.report);
    reports.push_back(row.report);
    if (!row.certificate) continue;
    row.certificate->problem_hash = hash;
    const std::string stem = lp.problem.name + "_order" + std::to_string(row.report.order);
    SaveCertificate(fs::path(out_dir) / (stem + ".cert.json"), *row.certificate);
    WriteGridFile(fs::path(out_dir) / (stem + ".grid.csv"), *row.certificate, res);
  }
  const fs::path report = fs::path(out_dir) / (lp.problem.name + ".sweep.json");
  SaveReport(report, reports, result.monotone);
  out << "report: " << report.string() << '\n';
  if (!result.monotone) {
    EmitError(err, {"not_monotone", "objective increased with the order", {}});
    return kCheckFailed;
  }
  return kOk;
}

int CmdBench(const std::string& fixtures, int order, const CommonSolve& s,
             const CommonCertify& c, const std::string& report_path, std::ostream& out,
             std::ostream& err) {
  std::vector<CertReport> reports;
  bool all_ok = true;
  const auto backend = MakeBackend(s.backend);
  for (const char* name : kBenchmarks) {
    CommonSolve bs = s;
    if (!bs.u_zero && !bs.horizon) bs.horizon = 100;
    const LoadedProblem lp = Load((fs::path(fixtures) / (std::string(name) + ".problem")).string(),
                                  bs, err);
    SweepRow row = SolveAndCertify(lp, order, *backend, Solver(lp, bs, err),
                                   Certifying(lp, c), s.timing);
    PrintSummary(out, row.report);
    all_ok = all_ok && row.report.solved() && row.report.u_validated() &&
             row.report.containment.passed();
    reports.push_back(std::move(row.report));
  }
  SaveReport(report_path, reports);
  out << "report: " << report_path << '\n';
  if (!all_ok) {
    EmitError(err, {"bench_failed", "a benchmark failed to solve, validate u or contain its samples", {}});
    return kCheckFailed;
  }
  return kOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Outer approximations of reachable sets of polynomial maps"};
  app.require_subcommand(1);

  CommonSolve solve_opts;
  CommonCertify cert_opts;
  std::string problem, cert_path, out_path, report_path, out_dir = ".";
  std::string fixtures = REACHSDP_DEFAULT_FIXTURES;
  int res = 200;
  int bench_order = 6;
  std::vector<int> orders, axes;

  auto* solve = app.add_subcommand("solve", "solve the SOS relaxation and certify it");
  solve->add_option("problem", problem, "problem file")->required();
  solve->add_option("--order", solve_opts.order, "relaxation order 2r");
  AddSolveFlags(solve, solve_opts);
  AddCertifyFlags(solve, cert_opts);
  solve->add_option("--out", out_path, "certificate file");
  solve->add_option("--report", report_path, "report file");

  auto* certify = app.add_subcommand("certify", "check a certificate by simulation");
  certify->add_option("problem", problem, "problem file")->required();
  certify->add_option("certificate", cert_path, "certificate file")->required();
  AddCertifyFlags(certify, cert_opts);
  certify->add_option("--report", report_path, "report file");

  auto* grid = app.add_subcommand("grid", "evaluate a certificate on a grid");
  grid->add_option("certificate", cert_path, "certificate file")->required();
  grid->add_option("--res", res, "points per axis")->check(CLI::PositiveNumber);
  grid->add_option("--out", out_path, "grid file")->required();
  grid->add_option("--axes", axes, "plotted variable indices (one or two)")
      ->delimiter(',')
      ->expected(1, 2);

  auto* sweep = app.add_subcommand("sweep", "solve and certify a list of orders");
  sweep->add_option("problem", problem, "problem file")->required();
  sweep->add_option("--orders", orders, "ascending orders 2r")->delimiter(',')->required();
  AddSolveFlags(sweep, solve_opts);
  AddCertifyFlags(sweep, cert_opts);
  sweep->add_option("--out-dir", out_dir, "directory for certificates, grids and report");
  sweep->add_option("--res", res, "grid points per axis")->check(CLI::PositiveNumber);

  auto* bench = app.add_subcommand("bench", "run the five benchmark fixtures");
  bench->add_option("--fixtures", fixtures, "fixture directory");
  bench->add_option("--order", bench_order, "relaxation order 2r");
  AddSolveFlags(bench, solve_opts);
  AddCertifyFlags(bench, cert_opts);
  bench->add_option("--report", report_path, "report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    EmitError(err, {"usage", e.what(), {}});
    return kUsage;
  }

  try {
    if (*solve) {
      return CmdSolve(problem, solve_opts, cert_opts, out_path, report_path, out, err);
    }
    if (*certify) return CmdCertify(problem, cert_path, cert_opts, report_path, out, err);
    if (*grid) return CmdGrid(cert_path, res, out_path, axes, out);
    if (*sweep) {
      return CmdSweep(problem, orders, solve_opts, cert_opts, out_dir, res, out, err);
    }
    if (*bench) {
      if (report_path.empty()) report_path = "bench.report.json";
      return CmdBench(fixtures, bench_order, solve_opts, cert_opts, report_path, out, err);
    }
  } catch (const ProblemFileError& e) {
    EmitError(err, {"problem_file", "invalid problem file", e.errors()});
    return kFailed;
  } catch (const SamplingTimeout& e) {
    EmitError(err, {"sampling_timeout", e.what(), {}});
    return kFailed;
  } catch (const std::invalid_argument& e) {
    EmitError(err, {"invalid_argument", e.what(), {}});
    return kFailed;
  } catch (const std::exception& e) {
    EmitError(err, {"runtime", e.what(), {}});
    return kFailed;
  }
  return kUsage;
}

}  // namespace reachsdp::cli

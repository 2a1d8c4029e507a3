// karcher: command-line front end.
//
//   karcher mean <ensemble.json> [--solver mm|gd-ls|gd-fixed] [--nu f] [--c f]
//                [--tol f] [--max-iters k] [--out mean.json] [--trace trace.csv]
//   karcher bench <spec.json> [--out prefix] [--seed k] [--threads k]
//   karcher check [--inject-fault g2-cancellation]
//
// Exit codes: 0 success, 1 input error, 2 solver did not converge, 3 check failure.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "karcher/karcher.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitCheckFailed = 3;

namespace fs = std::filesystem;

struct MeanArgs {
  std::string input;
  std::string solver = "mm";
  std::optional<double> nu, c, tol;
  std::optional<int> max_iters;
  std::string out = "mean.json";
  std::string trace;
};

struct BenchArgs {
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

struct CheckArgs {
  std::string fault;
};

void write_file(const fs::path& path, const std::string& text) { karcher::io::write_text(path, text); }

int cmd_mean(const MeanArgs& args) {
  using namespace karcher;
  std::optional<Ensemble<double>> ensemble;
  SolverConfig cfg;
  SolverKind kind{};
  try {
    ensemble.emplace(io::read_ensemble_file(args.input));
    const auto parsed = parse_solver_kind(args.solver);
    if (!parsed) throw InvalidArgument("--solver: unknown solver '" + args.solver + "'");
    kind = *parsed;
    if (args.nu) cfg.nu = *args.nu;
    if (args.c) cfg.c = *args.c;
    if (args.tol) cfg.grad_tol = *args.tol;
    if (args.max_iters) cfg.max_iters = *args.max_iters;
    cfg.validate();
  } catch (const Error& err) {
    std::cerr << "karcher mean: " << args.input << ": " << err.what() << '\n';
    return kExitInput;
  }

  const SolverResult<double> result = solve_working(kind, *ensemble, cfg);
  const fs::path out(args.out);
  fs::path trace_path(args.trace);
  if (args.trace.empty()) trace_path = fs::path(out).replace_extension(".trace.csv");
  try {
    const std::vector<Matrix<double>> mean{result.mean.matrix()};
    io::write_matrices_file(out, mean);
    std::ostringstream csv;
    io::write_trace_csv(csv, result.trace);
    write_file(trace_path, csv.str());
  } catch (const Error& err) {
    std::cerr << "karcher mean: " << err.what() << '\n';
    return kExitInput;
  }

  const TraceRecord& last = result.trace.back();
  std::cout << to_string(kind) << ": " << to_string(result.status) << " after " << result.iters_used
            << " iterations, grad_norm " << io::format_double(last.grad_norm) << '\n'
            << "mean written to " << out.string() << ", trace to " << trace_path.string() << '\n';
  return result.converged ? kExitOk : kExitNotConverged;
}

int cmd_bench(const BenchArgs& args) {
  using namespace karcher;
  bench::ExperimentSpec spec;
  try {
    spec = io::read_spec_file(args.spec);
    if (args.seed) spec.seed = *args.seed;
  } catch (const Error& err) {
    std::cerr << "karcher bench: " << args.spec << ": " << err.what() << '\n';
    return kExitInput;
  }

  const bench::ExperimentReport report = bench::run_experiment(spec, args.threads);
  const std::string prefix =
      args.out.empty() ? fs::path(args.spec).stem().string() : args.out;
  try {
    std::ostringstream csv, runs;
    io::write_report_csv(csv, report);
    io::write_runs_csv(runs, report);
    write_file(prefix + ".csv", csv.str());
    write_file(prefix + ".runs.csv", runs.str());
    write_file(prefix + ".json", io::spec_to_json(spec).dump(2) + "\n");
  } catch (const Error& err) {
    std::cerr << "karcher bench: " << err.what() << '\n';
    return kExitInput;
  }

  for (const auto& s : report.series) {
    int failed = 0, converged = 0;
    for (const auto& r : s.runs) {
      failed += r.failed;
      converged += !r.failed && r.status == SolverStatus::converged;
    }
    std::cout << s.id << ": " << converged << "/" << s.runs.size() << " converged";
    if (failed) std::cout << ", " << failed << " failed";
    std::cout << ", final mean log error "
              << (s.mean_log_error.empty() ? std::string("nan")
                                           : io::format_double(s.mean_log_error.back()))
              << '\n';
  }
  std::cout << "report written to " << prefix << ".csv (sidecar " << prefix << ".json)\n";
  return kExitOk;
}

int cmd_check(const CheckArgs& args) {
  karcher::check::Options opt;
  if (args.fault == "g2-cancellation") {
    opt.naive_g2 = true;
  } else if (!args.fault.empty()) {
    std::cerr << "karcher check: unknown fault '" << args.fault << "'\n";
    return kExitInput;
  }
  const auto rows = karcher::check::run_all(opt);
  karcher::check::print_table(std::cout, rows);
  return karcher::check::all_passed(rows) ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Karcher mean of SPD matrices"};
  app.require_subcommand(1);

  MeanArgs mean;
  auto* mean_cmd = app.add_subcommand("mean", "compute the Karcher mean of an ensemble file");
  mean_cmd->add_option("input", mean.input, "ensemble JSON file")->required();
  mean_cmd->add_option("--solver", mean.solver, "mm, gd-ls or gd-fixed")
      ->check(CLI::IsMember({"mm", "gd-ls", "gd-fixed"}));
  mean_cmd->add_option("--nu", mean.nu, "gradient descent step size");
  mean_cmd->add_option("--c", mean.c, "backtracking factor");
  mean_cmd->add_option("--tol", mean.tol, "gradient norm tolerance (default 1e-10*n)");
  mean_cmd->add_option("--max-iters", mean.max_iters, "iteration limit (default 500)");
  mean_cmd->add_option("--out", mean.out, "output mean file");
  mean_cmd->add_option("--trace", mean.trace, "trace CSV (default <out>.trace.csv)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "run an experiment spec");
  bench_cmd->add_option("spec", bench.spec, "experiment spec JSON")->required();
  bench_cmd->add_option("--out", bench.out, "output prefix (default: spec file stem)");
  bench_cmd->add_option("--seed", bench.seed, "override the spec seed");
  bench_cmd->add_option("--threads", bench.threads, "worker threads")->check(CLI::PositiveNumber);

  CheckArgs check;
  auto* check_cmd = app.add_subcommand("check", "run the oracle and invariant checks");
  check_cmd->add_option("--inject-fault", check.fault, "g2-cancellation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*mean_cmd) return cmd_mean(mean);
    if (*bench_cmd) return cmd_bench(bench);
    return cmd_check(check);
  } catch (const std::exception& err) {
    std::cerr << "karcher: " << err.what() << '\n';
    return kExitInput;
  }
}

#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mpcc/bench.hpp"
#include "mpcc/run.hpp"

namespace {

using namespace mpcc;

constexpr const char* kOptionsEnv = "MPCC_OPTIONS_FILE";

std::string num(double v) { return fmt::format("{:.17g}", v); }

bool usage_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kUnknownOption:
    case ErrorCode::kInvalidOptionValue:
    case ErrorCode::kUnknownBuiltin:
    case ErrorCode::kInvalidProblem:
    case ErrorCode::kInconsistentBounds:
      return true;
    default:
      return false;
  }
}

struct Common {
  std::string algorithm = "relaxation";
  std::optional<double> tol;
  std::optional<int> max_iter;
  bool crossover = false;
  std::vector<std::string> sets;
  std::string options_file;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--algorithm", c.algorithm, "relaxation or penalty")
      ->check(CLI::IsMember({"relaxation", "penalty"}));
  app->add_option("--tol", c.tol, "Termination tolerance");
  app->add_option("--max-iter", c.max_iter, "Iteration cap");
  app->add_option("--set", c.sets, "Option override key=value (repeatable)");
  app->add_option("--options-file", c.options_file,
                  std::string("Option file; defaults to $") + kOptionsEnv);
}

// Option file, then --tol/--max-iter, then --set in order.
RunConfig make_config(const Common& c) {
  RunConfig cfg;
  cfg.algorithm = parse_algorithm(c.algorithm);
  cfg.crossover = c.crossover;
  std::string file = c.options_file;
  if (file.empty()) {
    if (const char* env = std::getenv(kOptionsEnv)) {
      file = env;
    }
  }
  if (!file.empty()) {
    cfg.options.load_file(file);
  }
  if (c.tol) {
    cfg.options.set("tol", num(*c.tol));
  }
  if (c.max_iter) {
    cfg.options.set("max_iter", std::to_string(*c.max_iter));
  }
  for (const auto& s : c.sets) {
    cfg.set(s);
  }
  return cfg;
}

std::vector<std::string> echo(const RunConfig& cfg) {
  std::vector<std::string> lines;
  lines.push_back(fmt::format("algorithm={}", to_string(cfg.algorithm)));
  lines.push_back(fmt::format("crossover={}", cfg.crossover ? "true" : "false"));
  for (const auto& [k, v] : cfg.options.overrides()) {
    lines.push_back(fmt::format("option.{}={}", k, v));
  }
  return lines;
}

std::string join(const Vec& x) {
  std::string out;
  for (int i = 0; i < x.size(); ++i) {
    out += (i ? "," : "") + num(x[i]);
  }
  return out;
}

std::ostream& open_or(std::ofstream& file, const std::string& path) {
  if (path.empty()) {
    return std::cout;
  }
  file.open(path);
  if (!file) {
    throw Error(ErrorCode::kParse, "cannot write '" + path + "'");
  }
  return file;
}

struct SolveArgs {
  Common common;
  std::string file;
  std::string builtin;
  std::string log;
  std::string output;
};

int cmd_solve(const SolveArgs& a) {
  if (a.file.empty() == a.builtin.empty()) {
    std::cerr << "error: give exactly one of a problem file or --builtin\n";
    return 2;
  }
  RunConfig cfg = make_config(a.common);
  std::vector<int> order;
  MpccProblem problem =
      a.builtin.empty() ? to_mpcc(read_qpcc(a.file), &order) : builtin(a.builtin);
  RunResult r = run_solver(problem, cfg);
  const SolveResult& s = r.solve;

  if (!a.log.empty()) {
    std::ofstream log(a.log);
    if (!log) {
      throw Error(ErrorCode::kParse, "cannot write '" + a.log + "'");
    }
    for (const auto& line : echo(cfg)) {
      log << "# " << line << "\n";
    }
    write_log_csv(log, s.log);
  }

  std::ofstream file;
  std::ostream& out = open_or(file, a.output);
  out << "status=" << to_string(r.status) << "\n";
  out << "problem=" << (a.builtin.empty() ? a.file : a.builtin) << "\n";
  for (const auto& line : echo(cfg)) {
    out << line << "\n";
  }
  out << "objective=" << num(r.objective) << "\n";
  out << "kkt=" << num(r.report.overall) << "\n";
  out << "stationarity=" << num(r.report.stationarity) << "\n";
  out << "constraint_violation=" << num(r.report.constraint_violation) << "\n";
  out << "complementarity=" << num(r.complementarity) << "\n";
  out << "stationarity_label=" << to_string(s.stationarity) << "\n";
  out << "iterations=" << r.iterations << "\n";
  out << "factorizations=" << r.factorizations << "\n";
  out << "restorations=" << s.restorations << "\n";
  out << "mu=" << num(s.mu) << "\n";
  out << "tau=" << num(s.tau) << "\n";
  out << "rho=" << num(s.rho) << "\n";
  out << "max_delta_c=" << num(s.max_delta_c) << "\n";
  out << "x=" << join(to_file_order(r.x, order)) << "\n";
  if (!s.message.empty()) {
    out << "message=" << s.message << "\n";
  }
  if (r.crossover) {
    const CrossoverResult& c = *r.crossover;
    out << "crossover.status=" << to_string(c.status) << "\n";
    out << "crossover.lpecs=" << c.active_set.lpecs << "\n";
    out << "crossover.bnlps=" << c.active_set.bnlps << "\n";
    out << "crossover.b_stationary=" << (c.active_set.b_stationary ? "true" : "false")
        << "\n";
    out << "crossover.message=" << c.message << "\n";
    out << "\n" << format_crossover_table(c.table);
  }
  return r.status == Status::kSuccess ? 0 : 1;
}

struct BenchArgs {
  Common common;
  std::vector<std::string> files;
  std::vector<std::string> builtins;
  std::vector<std::string> solvers{"relaxation", "penalty"};
  int workers = 1;
  double timeout = 60.0;
  std::string output;
  std::string profile;
  std::string metric = "iterations";
};

int cmd_bench(const BenchArgs& a) {
  RunConfig cfg = make_config(a.common);
  std::vector<BenchProblem> problems;
  std::vector<std::string> names = a.builtins;
  if (names.empty() && a.files.empty()) {
    names = builtin_names();
  }
  for (const auto& n : names) {
    if (n == "all") {
      for (const auto& b : builtin_names()) problems.push_back({b, builtin(b)});
    } else {
      problems.push_back({n, builtin(n)});
    }
  }
  for (const auto& f : a.files) {
    problems.push_back({f, load_problem(f)});
  }
  for (const auto& s : a.solvers) {
    parse_algorithm(s);
  }
  BenchConfig bc;
  bc.workers = a.workers;
  bc.timeout = a.timeout;
  auto records = run_bench(a.solvers, problems, cfg.options, bc);
  std::ofstream file;
  write_records_csv(open_or(file, a.output), records);
  if (!a.profile.empty()) {
    std::ofstream pf(a.profile);
    if (!pf) {
      throw Error(ErrorCode::kParse, "cannot write '" + a.profile + "'");
    }
    write_profile_csv(pf, performance_profile(records, a.metric == "time"
                                                           ? ProfileMetric::kTime
                                                           : ProfileMetric::kIterations));
  }
  for (const auto& r : records) {
    if (r.status != Status::kSuccess) {
      return 1;
    }
  }
  return 0;
}

std::string kind_name(OptionKind k) {
  switch (k) {
    case OptionKind::kDouble: return "real";
    case OptionKind::kInt: return "integer";
    case OptionKind::kBool: return "bool";
    case OptionKind::kEnum: return "choice";
  }
  return "";
}

int cmd_list(bool options, bool builtins) {
  if (!options && !builtins) {
    options = builtins = true;
  }
  if (options) {
    std::cout << fmt::format("{:<28} {:<8} {:<12} {:<12} {}\n", "name", "kind",
                             "relaxation", "penalty", "description");
    for (const auto& o : option_table()) {
      std::string desc = o.description;
      if (!o.choices.empty()) {
        std::string c;
        for (const auto& ch : o.choices) c += (c.empty() ? "" : "|") + ch;
        desc += " {" + c + "}";
      }
      std::cout << fmt::format("{:<28} {:<8} {:<12} {:<12} {}\n", o.name,
                               kind_name(o.kind), o.default_relaxation,
                               o.default_penalty, desc);
    }
  }
  if (builtins) {
    if (options) std::cout << "\n";
    for (const auto& n : builtin_names()) {
      BuiltinInfo info = builtin_info(n);
      std::cout << fmt::format("{:<20} f*={:<6g} {}\n", n, info.optimum,
                               info.description);
    }
  }
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Interior-point solvers for complementarity-constrained programs"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve a problem file or builtin");
  s->add_option("file", solve.file, "JSON problem file");
  s->add_option("--builtin", solve.builtin, "Builtin problem name");
  s->add_flag("--crossover", solve.common.crossover, "Chain the LPEC crossover");
  s->add_option("--log", solve.log, "Per-iteration CSV log");
  s->add_option("--output", solve.output, "Summary file (default stdout)");
  add_common(s, solve.common);

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Run a solver by problem sweep");
  b->add_option("files", bench.files, "JSON problem files");
  b->add_option("--builtin", bench.builtins, "Builtin name or 'all' (repeatable)");
  b->add_option("--solvers", bench.solvers, "Solvers to compare")->delimiter(',');
  b->add_option("--workers", bench.workers, "Parallel workers")
      ->check(CLI::PositiveNumber);
  b->add_option("--timeout", bench.timeout, "Seconds per run");
  b->add_option("--output", bench.output, "Records CSV (default stdout)");
  b->add_option("--profile", bench.profile, "Performance profile CSV");
  b->add_option("--metric", bench.metric, "Profile metric")
      ->check(CLI::IsMember({"iterations", "time"}));
  add_common(b, bench.common);

  bool list_options = false;
  bool list_builtins = false;
  auto* l = app.add_subcommand("list", "List options or builtins");
  l->add_flag("--options", list_options, "Registered options and defaults");
  l->add_flag("--builtins", list_builtins, "Builtin problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (s->parsed()) return cmd_solve(solve);
    if (b->parsed()) return cmd_bench(bench);
    return cmd_list(list_options, list_builtins);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

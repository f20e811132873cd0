#include "mpcc/run.hpp"

#include "mpcc/model.hpp"
#include "mpcc/penalty.hpp"
#include "mpcc/relax.hpp"

namespace mpcc {

void RunConfig::set(std::string_view key, std::string_view value) {
  if (key == "algorithm") {
    algorithm = parse_algorithm(value);
  } else if (key == "crossover") {
    if (value == "true" || value == "1" || value == "yes") {
      crossover = true;
    } else if (value == "false" || value == "0" || value == "no") {
      crossover = false;
    } else {
      throw Error(ErrorCode::kInvalidOptionValue,
                  "option 'crossover' expects a boolean, got '" +
                      std::string(value) + "'");
    }
  } else {
    options.set(key, value);
  }
}

void RunConfig::set(std::string_view assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidOptionValue,
                "expected key=value, got '" + std::string(assignment) + "'");
  }
  auto trim = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
  };
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

RunResult run_solver(const MpccProblem& problem, const RunConfig& config,
                     const SolveHooks& hooks) {
  StandardProblem sp = to_standard_form(problem);
  RunResult out;
  out.solve = config.algorithm == Algorithm::kPenalty
                  ? solve_penalty(sp, config.options, hooks)
                  : solve_relaxation(sp, config.options, hooks);
  const SolveResult& r = out.solve;
  out.status = r.status;
  out.objective = r.objective;
  out.x = r.original_x;
  out.report = r.report;
  out.complementarity = r.complementarity;
  out.iterations = r.iterations;
  out.factorizations = r.factorizations;
  if (config.crossover && r.x.size() == sp.n() && r.x.allFinite()) {
    Settings s = Settings::from_options(config.options, config.algorithm);
    out.crossover = crossover_driver(r.x, sp, s);
    const CrossoverResult& c = *out.crossover;
    out.status = c.status;
    if (c.x.size() == sp.n()) {
      out.objective = c.objective;
      out.x = c.original_x;
      out.complementarity = c.complementarity;
      out.report.constraint_violation =
          sp.m() ? sp.constraints(c.x).lpNorm<Eigen::Infinity>() : 0.0;
    }
  }
  return out;
}

}  // namespace mpcc

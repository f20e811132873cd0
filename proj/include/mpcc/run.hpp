#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mpcc/crossover.hpp"
#include "mpcc/ipm.hpp"
#include "mpcc/options.hpp"

namespace mpcc {

/// Everything a front end chooses before a solve.
struct RunConfig {
  Algorithm algorithm = Algorithm::kRelaxation;
  bool crossover = false;
  Options options;

  /// Option assignment; the keys "algorithm" and "crossover" select the
  /// driver, every other key goes to `options`.
  void set(std::string_view key, std::string_view value);
  void set(std::string_view assignment);
};

struct RunResult {
  Status status = Status::kFailure;
  double objective = 0.0;
  /// Original variables of the final point.
  Vec x;
  TerminationReport report;
  double complementarity = 0.0;
  int iterations = 0;
  int factorizations = 0;
  SolveResult solve;
  std::optional<CrossoverResult> crossover;
};

/// Interior-point solve, followed by the crossover when requested. With the
/// crossover, status, point and objective come from it.
RunResult run_solver(const MpccProblem& problem, const RunConfig& config,
                     const SolveHooks& hooks = {});

}  // namespace mpcc

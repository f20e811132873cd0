#pragma once

#include <functional>

#include "mpcc/ipm.hpp"
#include "mpcc/penalty.hpp"
#include "mpcc/relax.hpp"

namespace mpcc::detail {

enum class Mode { kPlain, kRelaxation, kPenalty };

struct EngineConfig {
  Mode mode = Mode::kPlain;
  Settings settings;
  RelaxNlp* relax = nullptr;
  PenaltyNlp* penalty = nullptr;
  /// Fixed bound shift of the plain mode; the relaxation mode grows its own.
  Vec delta;
  bool allow_restoration = true;
  bool least_squares_y = true;
  /// Early exit checked from the second iteration on.
  std::function<bool(const Iterate&)> stop;
  bool* stopped = nullptr;
};

/// Minimum-norm y of ‖∇φ + Jᵀy - z‖; zero when the estimate exceeds 1e3.
Vec least_squares_multipliers(const Nlp& nlp, const Vec& p, const Vec& z);

TerminationReport termination_report(const Layout& l, const Vec& grad_lag,
                                     const Vec& h, const Vec& p, const Vec& w,
                                     const Vec& y, const Vec& z, bool scaled);

/// Fills original_x, objective and the stationarity label of a finished
/// solve whose multipliers are set.
void classify_result(SolveResult& res, const StandardProblem& problem,
                     const Settings& s);

SolveResult run_engine(Nlp& nlp, const EngineConfig& cfg, Iterate it,
                       const SolveHooks& hooks);

}  // namespace mpcc::detail

#pragma once

#include <string>
#include <vector>

#include "mpcc/ipm.hpp"
#include "mpcc/model.hpp"
#include "mpcc/options.hpp"
#include "mpcc/settings.hpp"

namespace mpcc {

/// Partition of the pairs: x2_i = 0 on i1, x1_i = 0 on i2. Indices 0-based.
struct Branch {
  std::vector<int> i1;
  std::vector<int> i2;

  bool valid(int n_cc) const;
  bool operator==(const Branch&) const = default;
};

/// Naive identification: i in i1 when x1_i >= x2_i, else i2.
Branch branch_from_point(const Vec& x1, const Vec& x2);

/// Trust-region LPCC data at a standard point x.
struct LpecInstance {
  int n0 = 0;
  int n_cc = 0;
  Vec x;
  Vec grad;
  Vec c;
  Mat jac;
  IndexSets sets;
  double delta = 0.0;
};

LpecInstance make_lpec(const StandardProblem& problem, const Vec& x,
                       double delta, double index_tol = 1e-6);

struct LpecSolution {
  bool feasible = false;
  Vec d;
  Branch branch;
  double objective = 0.0;
  /// Number of branch LPs solved.
  int lps = 0;
};

/// min gᵀd s.t. A d = b, lo <= d <= hi through the interior-point core,
/// followed by a vertex cleanup of near-active bounds.
struct BoxLpResult {
  bool feasible = false;
  Vec d;
  double objective = 0.0;
};
BoxLpResult solve_box_lp(const Vec& g, const Mat& a, const Vec& b,
                         const Vec& lo, const Vec& hi);

/// Enumerates the 2^|i_00| branches. Ties in the objective go to the
/// lexicographically smaller assignment (i1 before i2). Throws kCapExceeded
/// when |i_00| > cap.
LpecSolution solve_lpec_enumerate(const LpecInstance& lpec, int cap = 16);

/// Solves the LPCC as an MPCC with the relaxation algorithm, takes the branch
/// by the naive rule (ties to i1) and re-solves that branch's LP.
LpecSolution solve_lpec_relaxed(const LpecInstance& lpec,
                                const Options& options = {});

/// LPCC value gᵀd of a step.
double lpec_objective(const LpecInstance& lpec, const Vec& d);

/// Feasibility projection: linearized constraints, trust region and exact
/// complementarity of x + d on every pair. Stops at the first feasible
/// branch, trying the naive branch of x first.
LpecSolution proj_lpec(const StandardProblem& problem, const Vec& x,
                       double delta, int cap = 16);

struct BnlpResult {
  bool feasible = false;
  Vec x;
  double objective = 0.0;
  Status status = Status::kFailure;
  int iterations = 0;
};

/// Branch NLP with the fixed components eliminated; they are exactly zero in
/// the returned x. `gamma` is the accepted constraint violation of the start
/// after the feasibility pre-phase. Throws kBranchInfeasible when the solve
/// fails.
BnlpResult solve_bnlp(const Branch& branch, const Vec& x_init,
                      const StandardProblem& problem,
                      const Settings& settings, double gamma = kInf);

struct CrossoverRow {
  int iter = 0;
  int lpecs = 0;
  int bnlps = 0;
  int biactive = 0;
  double delta = 0.0;
  double step_norm = 0.0;
  double df = 0.0;
  std::string description;
};

struct ActiveSetResult {
  Status status = Status::kFailure;
  Vec x;
  Branch branch;
  double objective = 0.0;
  int lpecs = 0;
  int bnlps = 0;
  int accepted = 0;
  std::vector<double> accepted_objectives;
  std::vector<CrossoverRow> table;
  bool b_stationary = false;
};

/// Trust-region active-set loop on BNLPs until the LPEC step vanishes.
ActiveSetResult active_set_method(const Vec& x0, const Branch& branch0,
                                  double delta0, const StandardProblem& problem,
                                  const Settings& settings);

struct CrossoverResult {
  Status status = Status::kFailure;
  Vec x;
  Vec original_x;
  Branch branch;
  double objective = 0.0;
  double complementarity = 0.0;
  double projection_delta = 0.0;
  ActiveSetResult active_set;
  std::vector<CrossoverRow> table;
  std::string message;
};

CrossoverResult crossover_driver(const Vec& x_hat,
                                 const StandardProblem& problem,
                                 const Settings& settings);
CrossoverResult crossover_driver(const Vec& x_hat,
                                 const StandardProblem& problem,
                                 const Options& options);

/// Fixed-width table with the columns Iter, #LPCC, #BNLP, |I00|, Delta,
/// step norm, Delta f, description.
std::string format_crossover_table(const std::vector<CrossoverRow>& rows);

}  // namespace mpcc

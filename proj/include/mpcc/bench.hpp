#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mpcc/ipm.hpp"
#include "mpcc/model.hpp"
#include "mpcc/options.hpp"

namespace mpcc {

/// min ½ vᵀQv + qᵀv + constant  s.t.  lg <= A v <= ug,  lb <= v <= ub,
///   v_i ⊥ v_j for each pair (i, j) (shifted by the lower bounds).
struct QpccData {
  int n = 0;
  Mat Q;
  Vec q;
  double constant = 0.0;
  Mat A;
  Vec lg, ug;
  Vec lb, ub;
  std::vector<std::pair<int, int>> pairs;
  Vec start;

  bool operator==(const QpccData& other) const;
};

/// Parses the JSON problem schema (version 1). Matrices are either dense
/// row arrays or {"rows", "cols", "values"} coordinate objects; infinite
/// bounds are written as null or "inf"/"-inf".
QpccData parse_qpcc(std::string_view text);
QpccData read_qpcc(const std::string& path);
std::string serialize(const QpccData& data);
/// Checks symmetry, shapes and pair validity.
void validate(const QpccData& data);

/// Variables of the returned problem are ordered (unpaired, first members,
/// second members); `order[k]` is the file index of problem variable k.
MpccProblem to_mpcc(const QpccData& data, std::vector<int>* order = nullptr);
MpccProblem load_problem(const std::string& path);
/// Problem-order values back in file order; an empty `order` is the identity.
Vec to_file_order(const Vec& v, const std::vector<int>& order);

struct LabeledPoint {
  std::string description;
  /// Point in original coordinates.
  Vec x;
  Stationarity label;
};

struct BuiltinInfo {
  std::string name;
  std::string description;
  MpccProblem problem;
  double optimum = 0.0;
  bool convex = false;
  std::vector<LabeledPoint> points;
};

const std::vector<std::string>& builtin_names();
/// Registered data, with the optimum re-verified by brute force.
BuiltinInfo builtin_info(const std::string& name);
MpccProblem builtin(const std::string& name);

/// Global MPCC minimum of a problem with quadratic objective and linear
/// constraints: enumerates every face of the standard form that fixes one
/// member of each pair and solves its stationarity system densely.
struct BruteForceResult {
  bool feasible = false;
  double objective = kInf;
  Vec x;
};
BruteForceResult brute_force_qpcc(const StandardProblem& problem,
                                  double tol = 1e-9);

/// Multipliers (y, z0, ζ1, ζ2) at a feasible standard point by least squares
/// over the active bounds: z0 on x0_i <= tol, ζ1 where x1_i <= tol, ζ2
/// where x2_i <= tol.
MpccMultipliers estimate_multipliers(const StandardProblem& problem,
                                     const Vec& x, double tol = 1e-9);

struct BenchRecord {
  std::string solver;
  std::string problem;
  Status status = Status::kFailure;
  double objective = 0.0;
  double wall_time = 0.0;
  int iterations = 0;
  int factorizations = 0;
  double kkt = 0.0;
  double complementarity = 0.0;
};

struct BenchConfig {
  int workers = 1;
  /// Seconds per cell; a run that exceeds it is recorded as failure.
  double timeout = 60.0;
};

struct BenchProblem {
  std::string name;
  MpccProblem problem;
};

/// Runs every (solver, problem) cell. Records are ordered by solver, then
/// by problem, in input order.
std::vector<BenchRecord> run_bench(const std::vector<std::string>& solvers,
                                   const std::vector<BenchProblem>& problems,
                                   const Options& options,
                                   const BenchConfig& config = {});

enum class ProfileMetric { kIterations, kTime };

struct Profile {
  std::vector<std::string> solvers;
  /// Breakpoints θ, ascending, starting at 1.
  std::vector<double> thetas;
  /// fraction[s][k]: share of problems solver s solves within thetas[k].
  std::vector<std::vector<double>> fraction;
  std::vector<std::string> excluded;

  double at(int solver, double theta) const;
};

Profile performance_profile(const std::vector<BenchRecord>& records,
                            ProfileMetric metric = ProfileMetric::kIterations);

void write_records_csv(std::ostream& out,
                       const std::vector<BenchRecord>& records);
void write_profile_csv(std::ostream& out, const Profile& profile);
void write_log_csv(std::ostream& out, const std::vector<IterationRecord>& log);

}  // namespace mpcc

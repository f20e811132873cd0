#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mpcc/iterate.hpp"
#include "mpcc/linalg.hpp"
#include "mpcc/model.hpp"
#include "mpcc/settings.hpp"

namespace mpcc {

/// Smooth NLP min φ(p) s.t. h(p) = 0, p + δ >= 0 seen by the interior-point
/// core. Complementarity pairs of the layout may carry a Hessian coupling
/// kept apart from `hessian` so that it can be regularized.
class Nlp {
 public:
  virtual ~Nlp() = default;

  virtual Layout layout() const = 0;
  virtual double objective(const Vec& p) const = 0;
  virtual Vec gradient(const Vec& p) const = 0;
  virtual Vec constraints(const Vec& p) const = 0;
  virtual Mat jacobian(const Vec& p) const = 0;
  /// ∇²(φ + yᵀh) without the pair couplings.
  virtual Mat hessian(const Vec& p, const Vec& y) const = 0;
  /// Off-diagonal Hessian entry of each pair; empty when there is none.
  virtual Vec coupling(const Vec& p, const Vec& y) const;
  virtual KktShape shape() const { return KktShape::kPlain; }
};

/// Standard problem with complementarity ignored; every variable is an
/// ordinary nonnegative variable.
class PlainNlp : public Nlp {
 public:
  explicit PlainNlp(const StandardProblem& problem) : problem_(problem) {}

  Layout layout() const override;
  double objective(const Vec& p) const override;
  Vec gradient(const Vec& p) const override;
  Vec constraints(const Vec& p) const override;
  Mat jacobian(const Vec& p) const override;
  Mat hessian(const Vec& p, const Vec& y) const override;

 private:
  const StandardProblem& problem_;
};

/// Largest α in [0, 1] with v + α dv >= (1 - η) v.
double fraction_to_boundary(const Vec& v, const Vec& dv, double eta);

struct FilterEntry {
  double theta;
  double phi;
};

class Filter {
 public:
  /// True when no entry has both theta <= entry.theta and phi <= entry.phi
  /// violated, i.e. the pair improves on every entry in some component.
  bool acceptable(double theta, double phi) const;
  /// Adds the pair and removes entries it dominates.
  void add(double theta, double phi);
  void clear() { entries_.clear(); }
  const std::vector<FilterEntry>& entries() const { return entries_; }

 private:
  std::vector<FilterEntry> entries_;
};

struct FilterParams {
  double gamma_theta = 1e-5;
  double gamma_phi = 1e-5;
  double s_theta = 1.1;
  double s_phi = 2.3;
  double eta_phi = 1e-8;
  double delta = 1.0;
  double gamma_alpha = 0.05;
};

struct TerminationReport {
  double stationarity = 0.0;
  double constraint_violation = 0.0;
  double complementarity_bounds = 0.0;
  double complementarity_slacks = 0.0;
  double complementarity_upper = 0.0;
  double overall = 0.0;
};

bool check_termination(const TerminationReport& report, double tol);

/// Barrier objective φ(p) - μ Σ log(p + δ); +inf outside the interior.
double barrier_objective(const Nlp& nlp, const Vec& p, const Vec& delta,
                         double mu);
double constraint_violation(const Nlp& nlp, const Vec& p);

struct LineSearchState {
  Vec p;
  Vec delta;
  double mu = 0.0;
  double theta = 0.0;
  double phi = 0.0;
  /// ∇φ_μᵀ Δp at the current point.
  double slope = 0.0;
  double theta_min = 0.0;
  double theta_max = kInf;
};

struct LineSearchResult {
  double alpha = 0.0;
  bool accepted = false;
  bool armijo = false;
  int trials = 0;
  double theta = 0.0;
  double phi = 0.0;
};

LineSearchResult filter_line_search(const Nlp& nlp, const LineSearchState& st,
                                    const Vec& dp, Filter& filter,
                                    double alpha_max,
                                    const FilterParams& params = {});

enum class Status {
  kSuccess,
  kMaxIter,
  kRestorationFailed,
  kDiverged,
  kPenaltySaturated,
  kStalled,
  kFailure,
};

std::string_view to_string(Status status);

struct IterationRecord {
  int iter = 0;
  double mu = 0.0;
  double tau = 0.0;
  double rho = 0.0;
  double f = 0.0;
  double theta = 0.0;
  double kkt = 0.0;
  double comp = 0.0;
  double alpha_pr = 0.0;
  double alpha_du = 0.0;
  int factorizations = 0;
  double delta_w = 0.0;
  double delta_c = 0.0;
  std::string reg;
};

struct QualityTrace {
  /// Residual of the affine system (μ = τ = 0) and of the centering system.
  Vec r_aff;
  Vec r_cen;
  /// Solutions (Δp, Δy) of both systems.
  Vec d_aff;
  Vec d_cen;
  double sigma = 0.0;
};

/// Per-iteration view handed to an optional observer after the step
/// direction is computed.
struct IterationProbe {
  int iteration = 0;
  const AugmentedKkt* kkt = nullptr;
  const LdltFactorization* factorization = nullptr;
  const KktSolver* solver = nullptr;
  const Iterate* iterate = nullptr;
  bool inertia_ok = false;
  double mu = 0.0;
  double tau = 0.0;
  const QualityTrace* quality = nullptr;
};

struct SolveHooks {
  std::function<void(const IterationProbe&)> on_iteration;
};

struct SolveResult {
  Status status = Status::kFailure;
  std::string algorithm;
  Layout layout;
  Iterate iterate;
  /// Standard-form x and the corresponding original point.
  Vec x;
  Vec original_x;
  double objective = 0.0;
  TerminationReport report;
  double complementarity = 0.0;
  int iterations = 0;
  int factorizations = 0;
  int restorations = 0;
  double mu = 0.0;
  double tau = 0.0;
  double rho = 0.0;
  /// Endgame bound relaxations (x0 entries zero).
  Vec delta;
  double max_delta_c = 0.0;
  bool inertia_always_ok = true;
  MpccMultipliers multipliers;
  Stationarity stationarity = Stationarity::kNone;
  std::vector<IterationRecord> log;
  std::string message;
};

/// Standard bound-push initialization of a primal point.
Vec push_from_bounds(const Vec& p, double kappa1 = 1e-2);

/// Minimizes ‖h(p)‖₁ plus a proximity term at fixed μ with the plain core.
struct RestorationResult {
  bool success = false;
  Iterate iterate;
  int iterations = 0;
  int factorizations = 0;
};

RestorationResult restoration(const Nlp& nlp, const Iterate& it,
                              const Vec& delta, double mu,
                              const Filter& filter, const Settings& settings);

/// Plain interior-point solve of an NLP with the monotone barrier rule.
SolveResult solve_nlp(const Nlp& nlp, const Settings& settings,
                      const Vec& start = Vec(), const SolveHooks& hooks = {});

}  // namespace mpcc

#pragma once

#include <array>
#include <deque>

#include "mpcc/ipm.hpp"
#include "mpcc/model.hpp"
#include "mpcc/options.hpp"

namespace mpcc {

struct PenaltyState {
  double rho = 1.0;
  double rho_max = 1e10;
  int history_length = 10;
  std::deque<double> history;

  void record(double comp);
};

/// min f(x) + ρ x1ᵀx2 s.t. c(x) = 0, x >= 0.
class PenaltyNlp : public Nlp {
 public:
  PenaltyNlp(const StandardProblem& problem, double rho);

  void set_rho(double rho) { rho_ = rho; }
  double rho() const { return rho_; }

  Layout layout() const override;
  double objective(const Vec& p) const override;
  Vec gradient(const Vec& p) const override;
  Vec constraints(const Vec& p) const override;
  Mat jacobian(const Vec& p) const override;
  Mat hessian(const Vec& p, const Vec& y) const override;
  Vec coupling(const Vec& p, const Vec& y) const override;
  KktShape shape() const override { return KktShape::kPenalty; }

 private:
  const StandardProblem& problem_;
  double rho_;
};

/// r1..r7: gradient blocks of x0, x1, x2, c, then X0z0, X1z1, X2z2 minus μ.
using PenaltyResiduals = std::array<Vec, 7>;

PenaltyResiduals penalty_kkt_residual(const StandardProblem& problem,
                                      const Iterate& it, double mu, double rho);

double update_rho_static(double rho, bool barrier_solved, double growth,
                         double rho_max);

/// ‖c‖∞ >= μ^γ and x1ᵀx2 >= η·mean(history); never with empty history.
bool dynamic_trigger(double constraint_norm, double mu, double gamma,
                     double comp, const std::deque<double>& history,
                     double eta);

double update_rho_dynamic(const PenaltyState& state, double constraint_norm,
                          double mu, double comp, double gamma, double eta,
                          double growth);

/// Delegates to the critical or eigenclip Q-regularization.
int q_regularize_penalty(AugmentedKkt& kkt, QRegularization scheme,
                         double alpha, double lambda_min);

/// ζ1 = z1 - ρ x2, ζ2 = z2 - ρ x1.
MpccMultipliers penalty_mpcc_multipliers(const Layout& l, const Iterate& it,
                                         double rho);

SolveResult solve_penalty(const StandardProblem& problem,
                          const Options& options = {},
                          const SolveHooks& hooks = {});
SolveResult solve_penalty(const MpccProblem& problem,
                          const Options& options = {},
                          const SolveHooks& hooks = {});

}  // namespace mpcc

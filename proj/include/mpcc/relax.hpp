#pragma once

#include <array>
#include <functional>
#include <memory>

#include "mpcc/ipm.hpp"
#include "mpcc/model.hpp"
#include "mpcc/options.hpp"
#include "mpcc/settings.hpp"

namespace mpcc {

struct HomotopyState {
  double mu = 0.1;
  double tau = 1.0;
  Vec delta1;
  Vec delta2;
  Vec tau_v;
};

/// Scholtes relaxation of a standard problem:
///   min f(x) s.t. c(x) = 0, X1 x2 + s - τ_v = 0, x >= 0, s >= 0.
class RelaxNlp : public Nlp {
 public:
  explicit RelaxNlp(const StandardProblem& problem);

  void set_tau(const Vec& tau_v) { tau_v_ = tau_v; }
  void set_tau(double tau) { tau_v_.setConstant(tau); }
  const Vec& tau() const { return tau_v_; }
  const StandardProblem& problem() const { return problem_; }

  Layout layout() const override;
  double objective(const Vec& p) const override;
  Vec gradient(const Vec& p) const override;
  Vec constraints(const Vec& p) const override;
  Mat jacobian(const Vec& p) const override;
  Mat hessian(const Vec& p, const Vec& y) const override;
  Vec coupling(const Vec& p, const Vec& y) const override;
  KktShape shape() const override { return KktShape::kRelaxation; }

 private:
  const StandardProblem& problem_;
  Vec tau_v_;
};

/// The ten residual blocks r1..r10 of the perturbed relaxed KKT system.
using RelaxedResiduals = std::array<Vec, 10>;

RelaxedResiduals relaxed_kkt_residual(const StandardProblem& problem,
                                      const Iterate& it, double mu, double tau,
                                      const Vec& delta = Vec());

double update_mu_monotone(double mu, bool barrier_solved, double kappa_mu,
                          double theta_mu, double mu_min);
double update_tau_proportional(double mu, double alpha_tau, double beta_tau,
                               double sigma_min);
double update_tau_rolloff(double mu, double a, double b, double c,
                          double sigma_min);
/// γ min((1 - r)(1 - ξ)/ξ, 2)³.
double loqo_sigma(double xi, double gamma, double r);
double update_tau_loqo(const Vec& x1, const Vec& x2, double gamma, double r,
                       double sigma_min);
/// LOQO barrier value σ·avg over the given complementarity products. In
/// mpcc mode `upper` (X1 x2) joins the products; classic mode uses `lower`
/// only.
double update_mu_loqo(const Vec& lower, const Vec& upper, double gamma,
                      double r, double mu_min, bool mpcc_mode);
double loqo_xi(const Vec& lower, const Vec& upper, bool mpcc_mode);

/// Ψ(ζ, x2, τ) with barrier μ.
double endgame_psi(double zeta, double x2, double tau, double mu,
                   double delta_max);

/// Endgame step: relaxes the lower bound of x1_i (else x2_i) when the
/// estimated MPCC multiplier is below -‖r‖^ξ. δ never decreases.
void endgame_step(const Vec& zeta1_hat, const Vec& zeta2_hat, const Vec& x1,
                  const Vec& x2, const Vec& tau_v, double mu,
                  double residual_norm, double xi, double delta_max,
                  Vec& delta1, Vec& delta2);

struct CenteredStart {
  Vec x1;
  Vec x2;
  Vec s;
};

CenteredStart centered_init(int n_cc, double tau0, double k_cen,
                            bool sqrt_slack = false);

/// Golden-section minimization of a unimodal function on [lo, hi].
double golden_section(const std::function<double(double)>& f, double lo,
                      double hi, double tol = 1e-6);

/// Tau rule applied to a barrier value (iterate-based rules use x1, x2).
double tau_from_rule(const Settings& s, double mu, const Vec& x1,
                     const Vec& x2);

/// Multiplier estimates of the MPCC from a relaxed iterate:
/// ζ1 = z1 - y_s ∘ x2, ζ2 = z2 - y_s ∘ x1.
MpccMultipliers relaxed_mpcc_multipliers(const Layout& l, const Iterate& it);

SolveResult solve_relaxation(const StandardProblem& problem,
                             const Options& options = {},
                             const SolveHooks& hooks = {});
SolveResult solve_relaxation(const MpccProblem& problem,
                             const Options& options = {},
                             const SolveHooks& hooks = {});

}  // namespace mpcc

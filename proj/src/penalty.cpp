#include "mpcc/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "engine.hpp"

namespace mpcc {

void PenaltyState::record(double comp) {
  history.push_back(comp);
  while (static_cast<int>(history.size()) > history_length) {
    history.pop_front();
  }
}

PenaltyNlp::PenaltyNlp(const StandardProblem& problem, double rho)
    : problem_(problem), rho_(rho) {}

Layout PenaltyNlp::layout() const {
  Layout l;
  l.n0 = problem_.n0();
  l.n_cc = problem_.n_cc();
  l.m = problem_.m();
  return l;
}

double PenaltyNlp::objective(const Vec& p) const {
  const Layout l = layout();
  return problem_.objective(p) +
         rho_ * p.segment(l.n0, l.n_cc).dot(p.segment(l.n0 + l.n_cc, l.n_cc));
}

Vec PenaltyNlp::gradient(const Vec& p) const {
  const Layout l = layout();
  Vec g = problem_.gradient(p);
  g.segment(l.n0, l.n_cc) += rho_ * p.segment(l.n0 + l.n_cc, l.n_cc);
  g.segment(l.n0 + l.n_cc, l.n_cc) += rho_ * p.segment(l.n0, l.n_cc);
  return g;
}

Vec PenaltyNlp::constraints(const Vec& p) const {
  return problem_.constraints(p);
}

Mat PenaltyNlp::jacobian(const Vec& p) const { return problem_.jacobian(p); }

Mat PenaltyNlp::hessian(const Vec& p, const Vec& y) const {
  return problem_.hessian(p, y);
}

Vec PenaltyNlp::coupling(const Vec&, const Vec&) const {
  return Vec::Constant(problem_.n_cc(), rho_);
}

PenaltyResiduals penalty_kkt_residual(const StandardProblem& problem,
                                      const Iterate& it, double mu,
                                      double rho) {
  PenaltyNlp nlp(problem, rho);
  const Layout l = nlp.layout();
  Vec grad = nlp.gradient(it.p) + nlp.jacobian(it.p).transpose() * it.y - it.z;
  Vec wz = it.p.cwiseProduct(it.z).array() - mu;
  PenaltyResiduals r;
  r[0] = grad.head(l.n0);
  r[1] = grad.segment(l.n0, l.n_cc);
  r[2] = grad.segment(l.n0 + l.n_cc, l.n_cc);
  r[3] = nlp.constraints(it.p);
  r[4] = wz.head(l.n0);
  r[5] = wz.segment(l.n0, l.n_cc);
  r[6] = wz.segment(l.n0 + l.n_cc, l.n_cc);
  return r;
}

double update_rho_static(double rho, bool barrier_solved, double growth,
                         double rho_max) {
  if (!barrier_solved) {
    return rho;
  }
  return std::min(rho_max, growth * rho);
}

bool dynamic_trigger(double constraint_norm, double mu, double gamma,
                     double comp, const std::deque<double>& history,
                     double eta) {
  if (history.empty()) {
    return false;
  }
  double mean = std::accumulate(history.begin(), history.end(), 0.0) /
                static_cast<double>(history.size());
  return constraint_norm >= std::pow(mu, gamma) && comp >= eta * mean;
}

double update_rho_dynamic(const PenaltyState& state, double constraint_norm,
                          double mu, double comp, double gamma, double eta,
                          double growth) {
  if (!dynamic_trigger(constraint_norm, mu, gamma, comp, state.history, eta)) {
    return state.rho;
  }
  return std::min(state.rho_max, growth * state.rho);
}

int q_regularize_penalty(AugmentedKkt& kkt, QRegularization scheme,
                         double alpha, double lambda_min) {
  switch (scheme) {
    case QRegularization::kCritical:
      return q_regularize_critical(kkt, alpha);
    case QRegularization::kEigenClip:
      return q_regularize_eig(kkt, lambda_min);
    case QRegularization::kNone:
      break;
  }
  return 0;
}

MpccMultipliers penalty_mpcc_multipliers(const Layout& l, const Iterate& it,
                                         double rho) {
  MpccMultipliers m;
  m.y = it.y.head(l.m);
  m.z0 = it.z.head(l.n0);
  m.zeta1 = it.z.segment(l.n0, l.n_cc) - rho * it.x2(l);
  m.zeta2 = it.z.segment(l.n0 + l.n_cc, l.n_cc) - rho * it.x1(l);
  return m;
}

SolveResult solve_penalty(const StandardProblem& problem,
                          const Options& options, const SolveHooks& hooks) {
  const Settings s = Settings::from_options(options, Algorithm::kPenalty);
  PenaltyNlp nlp(problem, s.rho0);
  const Layout l = nlp.layout();
  Iterate it;
  it.p = push_from_bounds(problem.start());

  detail::EngineConfig cfg;
  cfg.mode = detail::Mode::kPenalty;
  cfg.settings = s;
  cfg.penalty = &nlp;
  SolveResult res = detail::run_engine(nlp, cfg, it, hooks);
  res.algorithm = "penalty";
  res.multipliers = penalty_mpcc_multipliers(l, res.iterate, res.rho);
  detail::classify_result(res, problem, s);
  return res;
}

SolveResult solve_penalty(const MpccProblem& problem, const Options& options,
                          const SolveHooks& hooks) {
  StandardProblem sp = to_standard_form(problem);
  return solve_penalty(sp, options, hooks);
}

}  // namespace mpcc

#include "mpcc/relax.hpp"

#include <algorithm>
#include <cmath>

#include "engine.hpp"

namespace mpcc {

RelaxNlp::RelaxNlp(const StandardProblem& problem)
    : problem_(problem), tau_v_(Vec::Zero(problem.n_cc())) {}

Layout RelaxNlp::layout() const {
  Layout l;
  l.n0 = problem_.n0();
  l.n_cc = problem_.n_cc();
  l.m = problem_.m();
  l.slacks = true;
  return l;
}

double RelaxNlp::objective(const Vec& p) const {
  return problem_.objective(p.head(problem_.n()));
}

Vec RelaxNlp::gradient(const Vec& p) const {
  const int n = problem_.n();
  Vec g = Vec::Zero(p.size());
  g.head(n) = problem_.gradient(p.head(n));
  return g;
}

Vec RelaxNlp::constraints(const Vec& p) const {
  const Layout l = layout();
  Vec h(l.n_rows());
  h.head(l.m) = problem_.constraints(p.head(l.n()));
  for (int i = 0; i < l.n_cc; ++i) {
    h[l.m + i] = p[l.x1(i)] * p[l.x2(i)] + p[l.s(i)] - tau_v_[i];
  }
  return h;
}

Mat RelaxNlp::jacobian(const Vec& p) const {
  const Layout l = layout();
  Mat j = Mat::Zero(l.n_rows(), l.n_primal());
  j.topLeftCorner(l.m, l.n()) = problem_.jacobian(p.head(l.n()));
  for (int i = 0; i < l.n_cc; ++i) {
    j(l.m + i, l.x1(i)) = p[l.x2(i)];
    j(l.m + i, l.x2(i)) = p[l.x1(i)];
    j(l.m + i, l.s(i)) = 1.0;
  }
  return j;
}

Mat RelaxNlp::hessian(const Vec& p, const Vec& y) const {
  const Layout l = layout();
  Mat h = Mat::Zero(l.n_primal(), l.n_primal());
  h.topLeftCorner(l.n(), l.n()) =
      problem_.hessian(p.head(l.n()), y.head(l.m));
  return h;
}

Vec RelaxNlp::coupling(const Vec&, const Vec& y) const {
  const Layout l = layout();
  return y.segment(l.m, l.n_cc);
}

RelaxedResiduals relaxed_kkt_residual(const StandardProblem& problem,
                                      const Iterate& it, double mu, double tau,
                                      const Vec& delta) {
  RelaxNlp nlp(problem);
  nlp.set_tau(tau);
  const Layout l = nlp.layout();
  const int n0 = l.n0;
  const int ncc = l.n_cc;
  Vec w = it.p;
  if (delta.size()) {
    w += delta;
  }
  Vec grad = nlp.gradient(it.p) + nlp.jacobian(it.p).transpose() * it.y - it.z;
  Vec h = nlp.constraints(it.p);
  Vec wz = w.cwiseProduct(it.z).array() - mu;
  RelaxedResiduals r;
  r[0] = grad.head(n0);
  r[1] = grad.segment(n0, ncc);
  r[2] = grad.segment(n0 + ncc, ncc);
  r[3] = grad.segment(l.n(), ncc);
  r[4] = h.head(l.m);
  r[5] = h.tail(ncc);
  r[6] = wz.head(n0);
  r[7] = wz.segment(n0, ncc);
  r[8] = wz.segment(n0 + ncc, ncc);
  r[9] = wz.segment(l.n(), ncc);
  return r;
}

double update_mu_monotone(double mu, bool barrier_solved, double kappa_mu,
                          double theta_mu, double mu_min) {
  if (!barrier_solved) {
    return mu;
  }
  return std::max(mu_min, std::min(kappa_mu * mu, std::pow(mu, theta_mu)));
}

double update_tau_proportional(double mu, double alpha_tau, double beta_tau,
                               double sigma_min) {
  return std::max(sigma_min, alpha_tau * std::pow(mu, beta_tau));
}

double update_tau_rolloff(double mu, double a, double b, double c,
                          double sigma_min) {
  // c / (1 + b μ^-a): monotone in μ and never above c under rounding.
  double ma = std::pow(mu, a);
  return std::max(sigma_min, c / (1.0 + b / ma));
}

double loqo_sigma(double xi, double gamma, double r) {
  if (!(xi > 0.0)) {
    return gamma * 8.0;
  }
  double t = std::min((1.0 - r) * (1.0 - xi) / xi, 2.0);
  return gamma * t * t * t;
}

namespace {

struct Products {
  double sum = 0.0;
  double min = kInf;
  int count = 0;
};

void accumulate(Products& p, const Vec& v) {
  for (int i = 0; i < v.size(); ++i) {
    p.sum += v[i];
    p.min = std::min(p.min, v[i]);
    ++p.count;
  }
}

}  // namespace

double update_tau_loqo(const Vec& x1, const Vec& x2, double gamma, double r,
                       double sigma_min) {
  Products pr;
  accumulate(pr, x1.cwiseProduct(x2));
  if (pr.count == 0 || !(pr.sum > 0.0)) {
    return sigma_min;
  }
  double xi = pr.count * pr.min / pr.sum;
  return std::max(sigma_min, loqo_sigma(xi, gamma, r) * pr.sum / pr.count);
}

double loqo_xi(const Vec& lower, const Vec& upper, bool mpcc_mode) {
  Products pr;
  accumulate(pr, lower);
  if (mpcc_mode) {
    accumulate(pr, upper);
  }
  if (pr.count == 0 || !(pr.sum > 0.0)) {
    return 1.0;
  }
  return pr.count * pr.min / pr.sum;
}

double update_mu_loqo(const Vec& lower, const Vec& upper, double gamma,
                      double r, double mu_min, bool mpcc_mode) {
  Products pr;
  accumulate(pr, lower);
  if (mpcc_mode) {
    accumulate(pr, upper);
  }
  if (pr.count == 0) {
    return mu_min;
  }
  double sigma = loqo_sigma(loqo_xi(lower, upper, mpcc_mode), gamma, r);
  return std::max(mu_min, sigma * pr.sum / pr.count);
}

double endgame_psi(double zeta, double x2, double tau, double mu,
                   double delta_max) {
  double den = mu * x2 + tau * zeta;
  if (zeta >= 0.0 && den > 0.0) {
    return tau * mu / den;
  }
  return delta_max;
}

void endgame_step(const Vec& zeta1_hat, const Vec& zeta2_hat, const Vec& x1,
                  const Vec& x2, const Vec& tau_v, double mu,
                  double residual_norm, double xi, double delta_max,
                  Vec& delta1, Vec& delta2) {
  const double bound = std::pow(residual_norm, xi);
  for (int i = 0; i < zeta1_hat.size(); ++i) {
    if (zeta1_hat[i] <= -bound) {
      double d = std::min(endgame_psi(zeta1_hat[i], x2[i], tau_v[i], mu,
                                      delta_max),
                          delta_max);
      delta1[i] = std::max(delta1[i], d);
    } else if (zeta2_hat[i] <= -bound) {
      double d = std::min(endgame_psi(zeta2_hat[i], x1[i], tau_v[i], mu,
                                      delta_max),
                          delta_max);
      delta2[i] = std::max(delta2[i], d);
    }
  }
}

CenteredStart centered_init(int n_cc, double tau0, double k_cen,
                            bool sqrt_slack) {
  const double k = std::clamp(k_cen, 1e-4, 1.0 - 1e-4);
  CenteredStart c;
  c.x1 = Vec::Constant(n_cc, std::sqrt(k * tau0));
  c.x2 = c.x1;
  c.s = Vec::Constant(n_cc, sqrt_slack ? std::sqrt(2.0 * (1.0 - k * tau0))
                                        : (1.0 - k) * tau0);
  return c;
}

double golden_section(const std::function<double(double)>& f, double lo,
                      double hi, double tol) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = f(d);
    }
  }
  // The interval endpoints are candidates too: q is often monotone.
  double best = fc <= fd ? c : d;
  double fbest = std::min(fc, fd);
  if (f(lo) < fbest) {
    best = lo;
    fbest = f(lo);
  }
  if (f(hi) < fbest) {
    best = hi;
  }
  return best;
}

double tau_from_rule(const Settings& s, double mu, const Vec& x1,
                     const Vec& x2) {
  switch (s.tau_rule) {
    case TauRule::kProportional:
      return update_tau_proportional(mu, s.sigma_mu_ratio, s.sigma_mu_exp,
                                     s.sigma_min);
    case TauRule::kLoqo:
      return update_tau_loqo(x1, x2, s.gamma, s.r, s.sigma_min);
    case TauRule::kRolloff:
      break;
  }
  return update_tau_rolloff(mu, s.rolloff_slope, s.rolloff_point,
                            s.rolloff_max, s.sigma_min);
}

MpccMultipliers relaxed_mpcc_multipliers(const Layout& l, const Iterate& it) {
  MpccMultipliers m;
  m.y = it.y.head(l.m);
  m.z0 = it.z.head(l.n0);
  Vec ys = it.y.segment(l.m, l.n_s());
  m.zeta1 = it.z.segment(l.n0, l.n_cc) - ys.cwiseProduct(it.x2(l));
  m.zeta2 = it.z.segment(l.n0 + l.n_cc, l.n_cc) - ys.cwiseProduct(it.x1(l));
  return m;
}

namespace detail {

void classify_result(SolveResult& res, const StandardProblem& problem,
                     const Settings& s) {
  res.original_x = problem.to_original(res.x);
  res.objective = problem.objective(res.x);
  const Layout& l = res.layout;
  try {
    // Termination only bounds x1 ∘ x2 by tol, so min(x1, x2) <= √tol.
    const double set_tol = std::max(s.index_set_tol, std::sqrt(s.tol));
    IndexSets sets = index_sets(res.iterate.x1(l), res.iterate.x2(l), set_tol);
    res.stationarity = classify_stationarity(res.x, res.multipliers, sets,
                                             problem, s.classification_tol);
  } catch (const Error&) {
    res.stationarity = Stationarity::kNone;
  }
}

}  // namespace detail

SolveResult solve_relaxation(const StandardProblem& problem,
                             const Options& options, const SolveHooks& hooks) {
  const Settings s = Settings::from_options(options, Algorithm::kRelaxation);
  RelaxNlp nlp(problem);
  const Layout l = nlp.layout();
  const int ncc = l.n_cc;

  Iterate it;
  it.p.resize(l.n_primal());
  it.p.head(l.n()) = push_from_bounds(problem.start());
  Vec x1 = it.p.segment(l.n0, ncc);
  Vec x2 = it.p.segment(l.n0 + ncc, ncc);
  double tau0 = tau_from_rule(s, s.mu_init, x1, x2);
  // A start supplied with the problem is taken as a guess for the pairs.
  if (s.center && problem.original().start.size() == 0) {
    CenteredStart c = centered_init(ncc, tau0, s.centering_factor,
                                    s.centering_slack_sqrt);
    it.p.segment(l.n0, ncc) = c.x1;
    it.p.segment(l.n0 + ncc, ncc) = c.x2;
    it.p.tail(ncc) = c.s;
  } else {
    Vec slack = (Vec::Constant(ncc, tau0) - x1.cwiseProduct(x2));
    it.p.tail(ncc) = push_from_bounds(slack);
  }
  nlp.set_tau(tau0);

  detail::EngineConfig cfg;
  cfg.mode = detail::Mode::kRelaxation;
  cfg.settings = s;
  cfg.relax = &nlp;
  SolveResult res = detail::run_engine(nlp, cfg, it, hooks);
  res.algorithm = "relaxation";
  res.multipliers = relaxed_mpcc_multipliers(l, res.iterate);
  detail::classify_result(res, problem, s);
  return res;
}

SolveResult solve_relaxation(const MpccProblem& problem,
                             const Options& options, const SolveHooks& hooks) {
  StandardProblem sp = to_standard_form(problem);
  return solve_relaxation(sp, options, hooks);
}

}  // namespace mpcc

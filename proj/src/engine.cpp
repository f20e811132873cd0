#include "engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/QR>

namespace mpcc::detail {

namespace {

constexpr double kSMax = 100.0;
constexpr double kKappaSigma = 1e10;
constexpr int kStallLimit = 10;
constexpr double kProgress = 0.9999;
constexpr int kRefCount = 4;

double inf_norm(const Vec& v) {
  return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0;
}

struct Scaling {
  double sd = 1.0;
  double sc = 1.0;
};

Scaling scaling(const Vec& y, const Vec& z, bool scaled) {
  Scaling s;
  if (!scaled) {
    return s;
  }
  const double count = static_cast<double>(y.size() + z.size());
  const double sum = y.lpNorm<1>() + z.lpNorm<1>();
  s.sd = std::max(kSMax, count > 0 ? sum / count : 0.0) / kSMax;
  s.sc = std::max(kSMax, z.size() ? z.lpNorm<1>() / z.size() : 0.0) / kSMax;
  return s;
}

}  // namespace

Vec least_squares_multipliers(const Nlp& nlp, const Vec& p, const Vec& z) {
  Mat j = nlp.jacobian(p);
  if (j.rows() == 0) {
    return Vec();
  }
  Vec rhs = z - nlp.gradient(p);
  Mat jt = j.transpose();
  Vec y = jt.completeOrthogonalDecomposition().solve(rhs);
  if (!y.allFinite() || inf_norm(y) > 1e3) {
    y.setZero();
  }
  return y;
}

TerminationReport termination_report(const Layout& l, const Vec& grad_lag,
                                     const Vec& h, const Vec& p, const Vec& w,
                                     const Vec& y, const Vec& z, bool scaled) {
  TerminationReport r;
  const Scaling sc = scaling(y, z, scaled);
  Vec wz = w.cwiseProduct(z);
  r.stationarity = inf_norm(grad_lag) / sc.sd;
  r.constraint_violation = inf_norm(h.head(l.m));
  r.complementarity_bounds = inf_norm(wz.head(l.n())) / sc.sc;
  r.complementarity_slacks = inf_norm(wz.segment(l.n(), l.n_s())) / sc.sc;
  Vec upper = p.segment(l.n0, l.n_cc).cwiseProduct(
      p.segment(l.n0 + l.n_cc, l.n_cc));
  r.complementarity_upper = inf_norm(upper);
  r.overall = std::max({r.stationarity, r.constraint_violation,
                        r.complementarity_bounds, r.complementarity_slacks,
                        r.complementarity_upper});
  return r;
}

SolveResult run_engine(Nlp& nlp, const EngineConfig& cfg, Iterate it,
                       const SolveHooks& hooks) {
  const Settings& s = cfg.settings;
  const Layout lay = nlp.layout();
  const int np = lay.n_primal();
  const int mh = lay.n_rows();
  const int ncc = lay.n_cc;
  const bool relax = cfg.mode == Mode::kRelaxation;
  const bool pen = cfg.mode == Mode::kPenalty;

  SolveResult res;
  res.layout = lay;
  KktSolver solver(s.kkt);
  Filter filter;
  const FilterParams fp;
  int extra_factorizations = 0;

  Vec delta = cfg.delta.size() == np ? cfg.delta : Vec(Vec::Zero(np));
  double mu = s.mu_init;
  double tau = relax && cfg.relax->tau().size() ? cfg.relax->tau()[0] : 0.0;
  PenaltyState pstate;
  if (pen) {
    pstate.rho = cfg.penalty->rho();
    pstate.rho_max = s.rho_max;
    pstate.history_length = s.history_length;
  }
  Vec delta1 = Vec::Zero(ncc);
  Vec delta2 = Vec::Zero(ncc);

  if (it.z.size() != np) {
    it.z = Vec::Ones(np);
  }
  if (it.y.size() != mh) {
    it.y = cfg.least_squares_y ? least_squares_multipliers(nlp, it.p, it.z)
                               : Vec();
    if (it.y.size() != mh) {
      it.y = Vec::Zero(mh);
    }
  }

  const double theta0 = constraint_violation(nlp, it.p);
  const double theta_max = 1e4 * std::max(1.0, theta0);
  const double theta_min = 1e-4 * std::max(1.0, theta0);

  std::deque<double> refs;
  int stalled_steps = 0;
  bool free_mode = s.mu_rule != MuRule::kMonotone;

  auto finish = [&](Status status, std::string message) {
    res.status = status;
    res.message = std::move(message);
    res.iterate = it;
    res.x = it.p.head(lay.n());
    res.objective = nlp.objective(it.p);
    res.mu = mu;
    res.tau = tau;
    res.rho = pstate.rho;
    res.delta = delta;
    res.factorizations = solver.factorization_count() + extra_factorizations;
    res.complementarity = res.report.complementarity_upper;
    return res;
  };

  for (int k = 0;; ++k) {
    res.iterations = k;
    Vec w = it.p + delta;
    Vec g = nlp.gradient(it.p);
    Vec h = nlp.constraints(it.p);
    Mat jac = nlp.jacobian(it.p);
    Vec grad_lag = g + jac.transpose() * it.y - it.z;
    res.report = termination_report(lay, grad_lag, h, it.p, w, it.y, it.z,
                                    s.scaled_termination);
    const TerminationReport& rep = res.report;

    const double size = std::max({inf_norm(it.p), inf_norm(it.y),
                                  inf_norm(it.z)});
    if (!it.p.allFinite() || !it.y.allFinite() || !it.z.allFinite() ||
        !std::isfinite(rep.overall) || size > s.diverge_threshold) {
      return finish(Status::kDiverged, "iterate norm exceeded diverge_threshold");
    }
    if (check_termination(rep, s.tol)) {
      return finish(Status::kSuccess, "converged");
    }
    if (cfg.stop && k > 0 && cfg.stop(it)) {
      if (cfg.stopped != nullptr) {
        *cfg.stopped = true;
      }
      return finish(Status::kSuccess, "stopping test satisfied");
    }
    if (k >= s.max_iter) {
      return finish(Status::kMaxIter, "iteration limit reached");
    }
    if (stalled_steps >= kStallLimit) {
      if (pen && pstate.rho >= s.rho_max && rep.complementarity_upper > s.tol) {
        return finish(Status::kPenaltySaturated,
                      "penalty reached rho_max without complementarity");
      }
      return finish(Status::kStalled, "no progress at the barrier floor");
    }

    // Homotopy updates: μ, then τ or ρ, then the endgame.
    const double mu_old = mu;
    const double tau_old = tau;
    const double rho_old = pstate.rho;
    const Vec delta_old = delta;
    const Scaling sc = scaling(it.y, it.z, s.scaled_termination);
    Vec x1 = it.p.segment(lay.n0, ncc);
    Vec x2 = it.p.segment(lay.n0 + ncc, ncc);
    const double comp_sum = x1.dot(x2);
    Vec wz = w.cwiseProduct(it.z);
    const double avg = (wz.sum() + comp_sum) / static_cast<double>(np + ncc);

    auto set_tau = [&](double t) {
      tau = t;
      cfg.relax->set_tau(t);
    };
    auto barrier_error = [&]() {
      Vec gg = nlp.gradient(it.p);
      Vec hh = nlp.constraints(it.p);
      Vec gl = gg + jac.transpose() * it.y - it.z;
      Vec cm = wz.array() - mu;
      return std::max({inf_norm(gl) / sc.sd, inf_norm(hh), inf_norm(cm) / sc.sc});
    };
    auto monotone = [&]() {
      for (int pass = 0; pass < 10; ++pass) {
        if (barrier_error() > s.kappa_eps * mu) {
          break;
        }
        double next = update_mu_monotone(mu, true, s.kappa_mu, s.theta_mu,
                                         s.mu_min);
        if (!(next < mu)) {
          break;
        }
        mu = next;
        if (relax) {
          set_tau(tau_from_rule(s, mu, x1, x2));
        }
      }
    };

    bool saturated = false;
    if (pen) {
      // ρ moves at most once per iteration, before μ.
      if (s.penalty_dynamic) {
        double cnorm = inf_norm(h.head(lay.m));
        const bool warm =
            static_cast<int>(pstate.history.size()) >= s.history_length;
        if (warm && dynamic_trigger(cnorm, mu, s.gamma, comp_sum,
                                    pstate.history, s.eta_pen)) {
          saturated = pstate.rho >= s.rho_max && mu <= s.mu_min;
          pstate.rho = std::min(s.rho_max, s.rho_growth * pstate.rho);
        }
        pstate.record(comp_sum);
      } else if (barrier_error() <= s.kappa_eps * mu &&
                 rep.complementarity_upper > std::max(s.tol, s.kappa_eps * mu)) {
        saturated = pstate.rho >= s.rho_max && mu <= s.mu_min;
        pstate.rho = update_rho_static(pstate.rho, true, s.rho_growth, s.rho_max);
      }
      cfg.penalty->set_rho(pstate.rho);
    }
    if (saturated) {
      return finish(Status::kPenaltySaturated,
                    "penalty reached rho_max without complementarity");
    }

    bool quality_now = false;
    if (s.mu_rule == MuRule::kMonotone) {
      monotone();
    } else {
      const double err = rep.overall;
      const double ref = refs.empty() ? kInf
                                      : *std::max_element(refs.begin(), refs.end());
      if (free_mode && err > kProgress * ref) {
        free_mode = false;
      } else if (!free_mode && err <= kProgress * ref) {
        free_mode = true;
      }
      if (free_mode) {
        refs.push_back(err);
        if (static_cast<int>(refs.size()) > kRefCount) {
          refs.pop_front();
        }
        if (s.mu_rule == MuRule::kLoqo) {
          mu = update_mu_loqo(wz, x1.cwiseProduct(x2), s.loqo_gamma, s.loqo_r,
                              s.mu_min, s.loqo_mpcc);
          if (relax) {
            set_tau(tau_from_rule(s, mu, x1, x2));
          }
        } else {
          quality_now = true;
        }
      } else {
        monotone();
      }
    }

    if (relax && s.endgame && ncc > 0 && rep.overall <= s.endgame_threshold) {
      Vec z1 = it.z.segment(lay.n0, ncc);
      Vec z2 = it.z.segment(lay.n0 + ncc, ncc);
      Vec zs = it.z.segment(lay.n(), ncc);
      Vec zeta1 = z1 - zs.cwiseProduct(x2);
      Vec zeta2 = z2 - zs.cwiseProduct(x1);
      endgame_step(zeta1, zeta2, x1, x2, cfg.relax->tau(), mu, rep.overall,
                   s.endgame_exp, s.delta_max, delta1, delta2);
      delta.segment(lay.n0, ncc) = delta1;
      delta.segment(lay.n0 + ncc, ncc) = delta2;
      w = it.p + delta;
      wz = w.cwiseProduct(it.z);
    }

    auto changed = [&]() {
      return mu != mu_old || tau != tau_old || pstate.rho != rho_old ||
             delta != delta_old;
    };
    if (changed()) {
      filter.clear();
    }

    // Step computation.
    g = nlp.gradient(it.p);
    h = nlp.constraints(it.p);
    AugmentedKkt kkt;
    CorrectionResult cr;
    bool need_restoration = false;
    try {
      kkt = assemble_kkt(nlp.shape(), lay, nlp.hessian(it.p, it.y), jac, w,
                         it.z, nlp.coupling(it.p, it.y));
      cr = solver.inertia_correct(kkt, mu);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kKktUnrecoverable) {
        throw;
      }
      need_restoration = true;
    }

    Vec dp, dy, dz;
    double alpha = 0.0;
    double alpha_z = 0.0;
    if (!need_restoration) {
      res.inertia_always_ok = res.inertia_always_ok && cr.inertia_ok;
      res.max_delta_c = std::max(res.max_delta_c, cr.delta_c);

      auto residual = [&](double m, double t) {
        Vec r(np + mh);
        r.head(np) = g + jac.transpose() * it.y - m * w.cwiseInverse();
        r.tail(mh) = h;
        if (relax) {
          r.tail(ncc).array() += tau - t;
        }
        return r;
      };

      QualityTrace trace;
      if (quality_now) {
        const double eta = std::max(0.99, 1.0 - mu);
        trace.r_aff = residual(0.0, 0.0);
        trace.r_cen = Vec::Zero(np + mh);
        trace.r_cen.head(np) = -avg * w.cwiseInverse();
        if (relax) {
          trace.r_cen.tail(ncc).setConstant(-avg);
        }
        trace.d_aff = solver.solve_step(cr.factorization, kkt, trace.r_aff);
        trace.d_cen = solver.solve_step(cr.factorization, kkt, trace.r_cen);
        const double gl2 = grad_lag.squaredNorm();
        const double c2 = h.head(lay.m).squaredNorm();
        auto q = [&](double sigma) {
          Vec d = trace.d_aff + sigma * trace.d_cen;
          Vec p_step = d.head(np);
          Vec z_step = recover_bound_multiplier_steps(w, it.z, p_step,
                                                      sigma * avg);
          double a_pr = fraction_to_boundary(w, p_step, eta);
          double a_du = fraction_to_boundary(it.z, z_step, eta);
          Vec wn = w + a_pr * p_step;
          Vec zn = it.z + a_du * z_step;
          Vec x1n = x1 + a_pr * p_step.segment(lay.n0, ncc);
          Vec x2n = x2 + a_pr * p_step.segment(lay.n0 + ncc, ncc);
          return (1.0 - a_du) * (1.0 - a_du) * gl2 +
                 (1.0 - a_pr) * (1.0 - a_pr) * c2 +
                 zn.cwiseProduct(wn).squaredNorm() +
                 x1n.cwiseProduct(x2n).squaredNorm();
        };
        trace.sigma = golden_section(q, s.quality_lo, s.quality_hi);
        mu = std::max(s.mu_min, trace.sigma * avg);
        if (relax) {
          set_tau(tau_from_rule(s, mu, x1, x2));
        }
        if (changed()) {
          filter.clear();
        }
      }

      Vec d = solver.solve_step(cr.factorization, kkt, residual(mu, tau));
      if (!d.allFinite()) {
        return finish(Status::kDiverged, "non-finite step");
      }
      dp = d.head(np);
      dy = d.tail(mh);
      dz = recover_bound_multiplier_steps(w, it.z, dp, mu);

      if (hooks.on_iteration) {
        IterationProbe probe;
        probe.iteration = k;
        probe.kkt = &kkt;
        probe.factorization = &cr.factorization;
        probe.solver = &solver;
        probe.iterate = &it;
        probe.inertia_ok = cr.inertia_ok;
        probe.mu = mu;
        probe.tau = tau;
        probe.quality = quality_now ? &trace : nullptr;
        hooks.on_iteration(probe);
      }

      const double eta = std::max(0.99, 1.0 - mu);
      const double alpha_max = fraction_to_boundary(w, dp, eta);
      alpha_z = fraction_to_boundary(it.z, dz, eta);

      double rel = 0.0;
      for (int i = 0; i < np; ++i) {
        rel = std::max(rel, std::abs(dp[i]) / (1.0 + std::abs(it.p[i])));
      }
      if (rel < 10.0 * std::numeric_limits<double>::epsilon()) {
        alpha = alpha_max;
      } else {
        LineSearchState st;
        st.p = it.p;
        st.delta = delta;
        st.mu = mu;
        st.theta = h.size() ? h.lpNorm<1>() : 0.0;
        st.phi = barrier_objective(nlp, it.p, delta, mu);
        st.slope = (g - mu * w.cwiseInverse()).dot(dp);
        st.theta_min = theta_min;
        st.theta_max = theta_max;
        LineSearchResult ls = filter_line_search(nlp, st, dp, filter,
                                                 alpha_max, fp);
        if (ls.accepted) {
          alpha = ls.alpha;
        } else {
          need_restoration = true;
        }
      }
    }

    if (need_restoration) {
      if (!cfg.allow_restoration) {
        return finish(Status::kRestorationFailed, "line search failed");
      }
      const double theta = h.size() ? h.lpNorm<1>() : 0.0;
      filter.add(theta, barrier_objective(nlp, it.p, delta, mu));
      RestorationResult rr = restoration(nlp, it, delta, mu, filter, s);
      ++res.restorations;
      extra_factorizations += rr.factorizations;
      if (!rr.success) {
        return finish(Status::kRestorationFailed, "restoration failed");
      }
      it = rr.iterate;
      IterationRecord rec;
      rec.iter = k;
      rec.mu = mu;
      rec.tau = tau;
      rec.rho = pstate.rho;
      rec.f = nlp.objective(it.p);
      rec.theta = constraint_violation(nlp, it.p);
      rec.kkt = rep.overall;
      rec.comp = rep.complementarity_upper;
      rec.factorizations = solver.factorization_count() + extra_factorizations;
      rec.reg = "restoration";
      res.log.push_back(rec);
      continue;
    }

    // Roundoff-sized primal steps with the homotopy at its floor.
    const double moved = alpha * inf_norm(dp);
    if (mu <= s.mu_min &&
        moved <= 10.0 * std::numeric_limits<double>::epsilon() *
                     std::max(1.0, inf_norm(it.p))) {
      ++stalled_steps;
    } else {
      stalled_steps = 0;
    }
    it.p += alpha * dp;
    it.y += alpha_z * dy;
    it.z += alpha_z * dz;
    Vec wn = it.p + delta;
    for (int i = 0; i < np; ++i) {
      double lo = mu / (kKappaSigma * wn[i]);
      double hi = kKappaSigma * mu / wn[i];
      it.z[i] = std::clamp(it.z[i], lo, hi);
    }

    IterationRecord rec;
    rec.iter = k;
    rec.mu = mu;
    rec.tau = tau;
    rec.rho = pstate.rho;
    rec.f = nlp.objective(it.p);
    rec.theta = constraint_violation(nlp, it.p);
    rec.kkt = rep.overall;
    rec.comp = rep.complementarity_upper;
    rec.alpha_pr = alpha;
    rec.alpha_du = alpha_z;
    rec.factorizations = solver.factorization_count() + extra_factorizations;
    rec.delta_w = cr.delta_w;
    rec.delta_c = cr.delta_c;
    rec.reg = cr.actions;
    res.log.push_back(rec);
  }
}

}  // namespace mpcc::detail

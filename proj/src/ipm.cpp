#include "mpcc/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>

#include "engine.hpp"

namespace mpcc {

Vec Nlp::coupling(const Vec&, const Vec&) const { return Vec(); }

Layout PlainNlp::layout() const {
  Layout l;
  l.n0 = problem_.n();
  l.m = problem_.m();
  return l;
}

double PlainNlp::objective(const Vec& p) const { return problem_.objective(p); }
Vec PlainNlp::gradient(const Vec& p) const { return problem_.gradient(p); }
Vec PlainNlp::constraints(const Vec& p) const {
  return problem_.constraints(p);
}
Mat PlainNlp::jacobian(const Vec& p) const { return problem_.jacobian(p); }
Mat PlainNlp::hessian(const Vec& p, const Vec& y) const {
  return problem_.hessian(p, y);
}

double fraction_to_boundary(const Vec& v, const Vec& dv, double eta) {
  double alpha = 1.0;
  for (int i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) {
      alpha = std::min(alpha, -eta * v[i] / dv[i]);
    }
  }
  return std::max(alpha, 0.0);
}

bool Filter::acceptable(double theta, double phi) const {
  for (const auto& e : entries_) {
    if (theta >= e.theta && phi >= e.phi) {
      return false;
    }
  }
  return true;
}

void Filter::add(double theta, double phi) {
  if (!acceptable(theta, phi)) {
    return;
  }
  std::erase_if(entries_, [&](const FilterEntry& e) {
    return e.theta >= theta && e.phi >= phi;
  });
  entries_.push_back({theta, phi});
}

bool check_termination(const TerminationReport& report, double tol) {
  return report.overall <= tol;
}

double barrier_objective(const Nlp& nlp, const Vec& p, const Vec& delta,
                         double mu) {
  double barrier = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    double w = p[i] + (delta.size() ? delta[i] : 0.0);
    if (!(w > 0.0)) {
      return kInf;
    }
    barrier += std::log(w);
  }
  double f = nlp.objective(p);
  if (!std::isfinite(f)) {
    return kInf;
  }
  return f - mu * barrier;
}

double constraint_violation(const Nlp& nlp, const Vec& p) {
  Vec h = nlp.constraints(p);
  return h.size() ? h.lpNorm<1>() : 0.0;
}

namespace {

// a <= b up to roundoff relative to the reference magnitude.
bool le(double a, double b, double ref) {
  return a - b <= 10.0 * std::numeric_limits<double>::epsilon() * std::abs(ref);
}

}  // namespace

LineSearchResult filter_line_search(const Nlp& nlp, const LineSearchState& st,
                                    const Vec& dp, Filter& filter,
                                    double alpha_max,
                                    const FilterParams& fp) {
  LineSearchResult res;
  const double theta = st.theta;
  const double phi = st.phi;
  const double slope = st.slope;

  double alpha_min = fp.gamma_theta;
  if (slope < 0.0) {
    alpha_min = std::min(fp.gamma_theta, fp.gamma_phi * theta / -slope);
    if (theta <= st.theta_min) {
      alpha_min = std::min(
          alpha_min, fp.delta * std::pow(theta, fp.s_theta) /
                         std::pow(-slope, fp.s_phi));
    }
  }
  alpha_min *= fp.gamma_alpha;

  double alpha = alpha_max;
  while (true) {
    if (alpha < alpha_min || alpha <= 0.0) {
      return res;
    }
    ++res.trials;
    Vec trial = st.p + alpha * dp;
    double th = 0.0;
    double ph = kInf;
    try {
      th = constraint_violation(nlp, trial);
      ph = barrier_objective(nlp, trial, st.delta, st.mu);
    } catch (const Error&) {
      th = kInf;
    }
    bool ok = std::isfinite(th) && std::isfinite(ph) && th <= st.theta_max &&
              filter.acceptable(th, ph);
    if (ok) {
      bool switching =
          slope < 0.0 && theta <= st.theta_min &&
          alpha * std::pow(-slope, fp.s_phi) > fp.delta * std::pow(theta, fp.s_theta);
      bool armijo = le(ph - phi, fp.eta_phi * alpha * slope, phi);
      if (switching) {
        if (armijo) {
          res.alpha = alpha;
          res.accepted = true;
          res.armijo = true;
          res.theta = th;
          res.phi = ph;
          return res;
        }
      } else if ((theta > 0.0 && le(th, (1.0 - fp.gamma_theta) * theta, theta)) ||
                 le(ph - phi, -fp.gamma_phi * theta, phi)) {
        filter.add((1.0 - fp.gamma_theta) * theta, phi - fp.gamma_phi * theta);
        res.alpha = alpha;
        res.accepted = true;
        res.theta = th;
        res.phi = ph;
        return res;
      }
    }
    alpha *= 0.5;
  }
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::kSuccess:
      return "success";
    case Status::kMaxIter:
      return "max_iter";
    case Status::kRestorationFailed:
      return "restoration_failed";
    case Status::kDiverged:
      return "diverged";
    case Status::kPenaltySaturated:
      return "penalty_saturated";
    case Status::kStalled:
      return "stalled";
    case Status::kFailure:
      return "failure";
  }
  return "failure";
}

Vec push_from_bounds(const Vec& p, double kappa1) {
  Vec out = p;
  for (int i = 0; i < out.size(); ++i) {
    out[i] = std::max(out[i], kappa1 * std::max(1.0, std::abs(out[i])));
  }
  return out;
}

namespace {

/// ℓ1 feasibility problem over (p, pp, nn):
///   min ρ_r Σ(pp + nn) + ζ/2 ‖D (p - p_ref)‖²  s.t. h(p) - pp + nn = 0.
class RestorationNlp : public Nlp {
 public:
  RestorationNlp(const Nlp& inner, Vec p_ref, double zeta)
      : inner_(inner), inner_layout_(inner.layout()), ref_(std::move(p_ref)),
        zeta_(zeta) {
    np_ = inner_layout_.n_primal();
    mh_ = inner_layout_.n_rows();
    d2_.resize(np_);
    for (int i = 0; i < np_; ++i) {
      double d = 1.0 / std::max(1.0, std::abs(ref_[i]));
      d2_[i] = d * d;
    }
  }

  Layout layout() const override {
    Layout l;
    l.n0 = np_ + 2 * mh_;
    l.m = mh_;
    return l;
  }

  double objective(const Vec& q) const override {
    Vec dp = q.head(np_) - ref_;
    return kRho * q.tail(2 * mh_).sum() +
           0.5 * zeta_ * dp.cwiseProduct(d2_).dot(dp);
  }

  Vec gradient(const Vec& q) const override {
    Vec g(np_ + 2 * mh_);
    g.head(np_) = zeta_ * d2_.cwiseProduct(q.head(np_) - ref_);
    g.tail(2 * mh_).setConstant(kRho);
    return g;
  }

  Vec constraints(const Vec& q) const override {
    return inner_.constraints(q.head(np_)) - q.segment(np_, mh_) +
           q.tail(mh_);
  }

  Mat jacobian(const Vec& q) const override {
    Mat j = Mat::Zero(mh_, np_ + 2 * mh_);
    j.leftCols(np_) = inner_.jacobian(q.head(np_));
    j.middleCols(np_, mh_) = -Mat::Identity(mh_, mh_);
    j.rightCols(mh_) = Mat::Identity(mh_, mh_);
    return j;
  }

  Mat hessian(const Vec& q, const Vec& y) const override {
    const int n = np_ + 2 * mh_;
    Mat h = Mat::Zero(n, n);
    Vec p = q.head(np_);
    // The objective part of the inner Hessian is excluded.
    Mat inner_h = inner_.hessian(p, y) - inner_.hessian(p, Vec::Zero(mh_));
    Vec cpl = inner_.coupling(p, y) - inner_.coupling(p, Vec::Zero(mh_));
    for (int i = 0; i < cpl.size(); ++i) {
      int a = inner_layout_.x1(i);
      int b = inner_layout_.x2(i);
      inner_h(a, b) += cpl[i];
      inner_h(b, a) += cpl[i];
    }
    h.topLeftCorner(np_, np_) = inner_h;
    h.topLeftCorner(np_, np_).diagonal() += zeta_ * d2_;
    return h;
  }

  static constexpr double kRho = 1000.0;

 private:
  const Nlp& inner_;
  Layout inner_layout_;
  Vec ref_;
  double zeta_;
  Vec d2_;
  int np_ = 0;
  int mh_ = 0;
};

}  // namespace

RestorationResult restoration(const Nlp& nlp, const Iterate& it,
                              const Vec& delta, double mu,
                              const Filter& filter, const Settings& settings) {
  RestorationResult out;
  out.iterate = it;
  const Layout l = nlp.layout();
  const int np = l.n_primal();
  const int mh = l.n_rows();
  Vec h = nlp.constraints(it.p);
  const double theta_ref = h.size() ? h.lpNorm<1>() : 0.0;
  if (theta_ref == 0.0) {
    out.success = true;
    return out;
  }
  const double mu_r = std::max(mu, h.lpNorm<Eigen::Infinity>());
  const double rho = RestorationNlp::kRho;
  RestorationNlp rnlp(nlp, it.p, std::sqrt(mu_r));

  // Closed-form pp, nn minimizing the barrier model for fixed p.
  Iterate start;
  start.p.resize(np + 2 * mh);
  start.p.head(np) = it.p;
  start.z.resize(np + 2 * mh);
  start.z.head(np) = it.z;
  for (int j = 0; j < mh; ++j) {
    double a = (mu_r - rho * h[j]) / (2.0 * rho);
    double nn = a + std::sqrt(a * a + mu_r * h[j] / (2.0 * rho));
    double pp = h[j] + nn;
    start.p[np + j] = pp;
    start.p[np + mh + j] = nn;
    start.z[np + j] = mu_r / pp;
    start.z[np + mh + j] = mu_r / nn;
  }
  start.y = Vec::Zero(mh);

  Vec full_delta = Vec::Zero(np + 2 * mh);
  if (delta.size()) {
    full_delta.head(np) = delta;
  }

  detail::EngineConfig cfg;
  cfg.mode = detail::Mode::kPlain;
  cfg.settings = settings;
  cfg.settings.mu_init = mu_r;
  cfg.settings.mu_rule = MuRule::kMonotone;
  cfg.settings.max_iter = 200;
  cfg.settings.kkt.inertia_correction = true;
  cfg.delta = full_delta;
  cfg.allow_restoration = false;
  cfg.least_squares_y = false;
  cfg.stop = [&](const Iterate& q) {
    Vec p = q.p.head(np);
    double th = constraint_violation(nlp, p);
    double ph = barrier_objective(nlp, p, delta, mu);
    return th <= 0.9 * theta_ref && std::isfinite(ph) &&
           filter.acceptable(th, ph);
  };
  bool stopped = false;
  cfg.stopped = &stopped;

  SolveResult r = detail::run_engine(rnlp, cfg, start, {});
  out.iterations = r.iterations;
  out.factorizations = r.factorizations;
  if (!stopped) {
    return out;
  }
  out.success = true;
  out.iterate.p = r.iterate.p.head(np);
  Vec w = out.iterate.p + (delta.size() ? delta : Vec::Zero(np));
  out.iterate.z = r.iterate.z.head(np);
  for (int i = 0; i < np; ++i) {
    if (!(out.iterate.z[i] > 0.0)) {
      out.iterate.z[i] = mu / w[i];
    }
  }
  out.iterate.y = detail::least_squares_multipliers(nlp, out.iterate.p,
                                                    out.iterate.z);
  return out;
}

SolveResult solve_nlp(const Nlp& nlp, const Settings& settings,
                      const Vec& start, const SolveHooks& hooks) {
  const Layout l = nlp.layout();
  Iterate it;
  it.p = start.size() ? start : Vec(Vec::Zero(l.n_primal()));
  it.p = push_from_bounds(it.p);
  it.z = Vec::Ones(l.n_primal());
  detail::EngineConfig cfg;
  cfg.mode = detail::Mode::kPlain;
  cfg.settings = settings;
  return detail::run_engine(const_cast<Nlp&>(nlp), cfg, it, hooks);
}

}  // namespace mpcc

#include <doctest.h>

#include "mpcc/ipm.hpp"
#include "support.hpp"

using namespace mpcc;
using namespace mpcc::test;

namespace {

// ½‖p − a‖² over p >= 0, no rows.
class Quadratic : public Nlp {
 public:
  explicit Quadratic(Vec a) : a_(std::move(a)) {}
  Layout layout() const override { return {static_cast<int>(a_.size()), 0, 0, false}; }
  double objective(const Vec& p) const override { return 0.5 * (p - a_).squaredNorm(); }
  Vec gradient(const Vec& p) const override { return p - a_; }
  Vec constraints(const Vec&) const override { return Vec(); }
  Mat jacobian(const Vec& p) const override { return Mat::Zero(0, p.size()); }
  Mat hessian(const Vec& p, const Vec&) const override {
    return Mat::Identity(p.size(), p.size());
  }

 private:
  Vec a_;
};

QpccData linear_rows(const Mat& a, const Vec& rhs) {
  QpccData d;
  d.n = static_cast<int>(a.cols());
  d.Q = Mat::Identity(d.n, d.n);
  d.q = Vec::Zero(d.n);
  d.A = a;
  d.lg = rhs;
  d.ug = rhs;
  d.lb = Vec::Zero(d.n);
  d.ub = Vec::Constant(d.n, kInf);
  return d;
}

LineSearchState state_at(const Nlp& nlp, const Vec& p, const Vec& dp, double mu) {
  LineSearchState st;
  st.p = p;
  st.delta = Vec::Zero(p.size());
  st.mu = mu;
  st.theta = constraint_violation(nlp, p);
  st.phi = barrier_objective(nlp, p, st.delta, mu);
  Vec g = nlp.gradient(p) - mu * p.cwiseInverse();
  st.slope = g.dot(dp);
  st.theta_min = 1e-4 * std::max(1.0, st.theta);
  st.theta_max = 1e4 * std::max(1.0, st.theta);
  return st;
}

}  // namespace

TEST_CASE("fraction_to_boundary examples") {
  CHECK(fraction_to_boundary(point({1, 2}), point({0, 3}), 0.99) == 1.0);
  CHECK(fraction_to_boundary(point({1}), point({-1}), 0.01) == doctest::Approx(0.01));
  CHECK(fraction_to_boundary(point({1}), point({-1}), 0.99) == doctest::Approx(0.99));
  CHECK(fraction_to_boundary(point({2, 1}), point({-4, -1}), 0.5) == doctest::Approx(0.25));
}

TEST_CASE("fraction_to_boundary is tight") {
  std::mt19937 rng(21);
  for (int t = 0; t < 2000; ++t) {
    int n = uniform_int(rng, 1, 8);
    Vec v = random_vec(rng, n, 1e-3, 10.0);
    Vec dv = random_vec(rng, n, -50.0, 5.0);
    double eta = uniform(rng, 0.01, 0.999);
    double a = fraction_to_boundary(v, dv, eta);
    REQUIRE(a >= 0.0);
    REQUIRE(a <= 1.0);
    Vec lo = (1.0 - eta) * v;
    Vec at = v + a * dv;
    CHECK(((at - lo).array() >= -1e-12 * v.array()).all());
    if (a < 1.0) {
      Vec past = v + (a / (1.0 - 1e-12)) * dv;
      CHECK(((past - lo).array() < 0.0).any());
    }
  }
}

TEST_CASE("filter keeps no dominated pair") {
  Filter f;
  f.add(1.0, 1.0);
  CHECK_FALSE(f.acceptable(1.0, 1.0));
  CHECK_FALSE(f.acceptable(2.0, 1.5));
  CHECK(f.acceptable(0.5, 3.0));
  CHECK(f.acceptable(3.0, 0.5));
  f.add(0.5, 0.5);
  CHECK(f.entries().size() == 1);

  std::mt19937 rng(22);
  Filter g;
  for (int t = 0; t < 500; ++t) {
    g.add(uniform(rng, 0, 10), uniform(rng, -10, 10));
    const auto& e = g.entries();
    for (size_t i = 0; i < e.size(); ++i)
      for (size_t j = 0; j < e.size(); ++j)
        if (i != j) REQUIRE_FALSE((e[i].theta <= e[j].theta && e[i].phi <= e[j].phi));
  }
}

TEST_CASE("check_termination examples") {
  TerminationReport r;
  CHECK(check_termination(r, 1e-8));
  r.complementarity_upper = 1e-7;
  r.overall = 1e-7;
  CHECK_FALSE(check_termination(r, 1e-8));
  CHECK(Settings().tol == 1e-8);
  CHECK(Settings::from_options(Options(), Algorithm::kRelaxation).tol == 1e-8);
}

TEST_CASE("check_termination is monotone in the tolerance") {
  std::mt19937 rng(23);
  for (int t = 0; t < 1000; ++t) {
    TerminationReport r;
    r.overall = std::exp(uniform(rng, -25, 2));
    double a = std::exp(uniform(rng, -25, 2));
    double b = a * std::exp(uniform(rng, 0, 5));
    if (check_termination(r, a)) CHECK(check_termination(r, b));
  }
}

TEST_CASE("filter line search examples") {
  Quadratic q(point({2, 3}));
  Vec p = point({1, 1});
  Vec dp = point({1, 2});
  Filter f;
  LineSearchResult r = filter_line_search(q, state_at(q, p, dp, 0.0), dp, f, 1.0);
  CHECK(r.accepted);
  CHECK(r.alpha == 1.0);
  CHECK(r.trials == 1);

  Filter g;
  Vec up = -dp;
  LineSearchResult bad =
      filter_line_search(q, state_at(q, point({2.5, 3.5}), point({1, 1}), 0.0),
                         point({1, 1}), g, 1.0);
  CHECK_FALSE(bad.accepted);
  (void)up;
}

TEST_CASE("restoration examples") {
  Settings s;
  Mat a(1, 2);
  a << 1, 1;
  StandardProblem sp = standard(linear_rows(a, point({1})));
  PlainNlp nlp(sp);
  Layout l = nlp.layout();

  Iterate feasible;
  feasible.p = point({0.5, 0.5});
  feasible.y = Vec::Zero(l.n_rows());
  feasible.z = Vec::Ones(2);
  RestorationResult same =
      restoration(nlp, feasible, Vec::Zero(2), 0.1, Filter(), s);
  CHECK(same.success);
  CHECK(same.iterate.p == feasible.p);

  Iterate far = feasible;
  far.p = point({3, 4});
  double theta0 = constraint_violation(nlp, far.p);
  RestorationResult moved = restoration(nlp, far, Vec::Zero(2), 0.1, Filter(), s);
  CHECK(moved.success);
  CHECK(constraint_violation(nlp, moved.iterate.p) <= 0.1 * theta0);
  CHECK((moved.iterate.p.array() > 0.0).all());
}

TEST_CASE("inconsistent constraints end in restoration failure") {
  Mat a(2, 1);
  a << 1, 1;
  StandardProblem sp = standard(linear_rows(a, point({0, 1})));
  PlainNlp nlp(sp);
  Settings s;
  s.max_iter = 200;
  SolveResult r = solve_nlp(nlp, s);
  CHECK(r.status == Status::kRestorationFailed);
}

TEST_CASE("plain solves keep the iterate interior") {
  std::mt19937 rng(24);
  for (int t = 0; t < 20; ++t) {
    QpccData d = random_qpcc(rng, 6, 2, 0);
    StandardProblem sp = standard(d);
    PlainNlp nlp(sp);
    Settings s;
    SolveHooks hooks;
    bool interior = true;
    hooks.on_iteration = [&](const IterationProbe& probe) {
      interior = interior && (probe.iterate->p.array() > 0.0).all() &&
                 (probe.iterate->z.array() > 0.0).all();
    };
    SolveResult r = solve_nlp(nlp, s, Vec(), hooks);
    CHECK(interior);
    if (r.status == Status::kSuccess) CHECK(r.report.overall <= s.tol);
  }
}

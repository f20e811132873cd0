#include <doctest.h>

#include "mpcc/relax.hpp"
#include "support.hpp"

using namespace mpcc;
using namespace mpcc::test;

namespace {

SolveResult relax(const std::string& name, const Options& o = {}) {
  return solve_relaxation(builtin(name), o);
}

Options with(std::initializer_list<std::pair<const char*, const char*>> kv) {
  Options o;
  for (const auto& [k, v] : kv) o.set(k, v);
  return o;
}

}  // namespace

TEST_CASE("monotone barrier rule") {
  CHECK(update_mu_monotone(0.1, true, 0.2, 1.5, 1e-11) == doctest::Approx(0.02));
  CHECK(update_mu_monotone(0.1, false, 0.2, 1.5, 1e-11) == 0.1);
  CHECK(update_mu_monotone(1e-9, true, 0.2, 1.5, 1e-9) == 1e-9);
  // μ^1.5 wins below 0.04.
  CHECK(update_mu_monotone(0.01, true, 0.2, 1.5, 1e-11) == doctest::Approx(1e-3));
}

TEST_CASE("proportional tau rule") {
  CHECK(update_tau_proportional(0.01, 1, 1, 1e-8) == 0.01);
  CHECK(update_tau_proportional(0.01, 0.1, 1, 1e-8) == doctest::Approx(0.001));
  CHECK(update_tau_proportional(1e-4, 1, 0.5, 1e-8) == doctest::Approx(1e-2));
  CHECK(update_tau_proportional(1e-12, 1, 1, 1e-8) == 1e-8);
}

TEST_CASE("rolloff tau rule") {
  CHECK(update_tau_rolloff(1e8, 1, 1, 1, 1e-8) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(update_tau_rolloff(0.1, 2, 1e-6, 1, 1e-8) ==
        doctest::Approx(1e-2 / (1e-2 + 1e-6)));
  CHECK(update_tau_rolloff(0.1, 2, 1e-6, 1, 1e-8) == doctest::Approx(0.9999).epsilon(1e-4));
  CHECK(update_tau_rolloff(1e-6, 2, 1e-6, 1, 1e-8) == doctest::Approx(1e-6).epsilon(1e-5));
}

TEST_CASE("rolloff rule is monotone and bounded by its plateau") {
  std::mt19937 rng(31);
  for (int t = 0; t < 200; ++t) {
    double a = uniform(rng, 0.5, 4), b = std::exp(uniform(rng, -15, 0));
    double c = uniform(rng, 0.1, 10);
    double prev = 0.0;
    for (double lm = -14; lm <= 4; lm += 0.25) {
      double tau = update_tau_rolloff(std::pow(10.0, lm), a, b, c, 0.0);
      CHECK(tau >= prev);
      CHECK(tau <= c);
      prev = tau;
    }
  }
}

TEST_CASE("LOQO tau rule") {
  CHECK(loqo_sigma(1.0, 2.0, 0.05) == 0.0);
  CHECK(update_tau_loqo(point({0.5, 0.5}), point({2, 2}), 2.0, 0.05, 1e-8) == 1e-8);
  CHECK(update_tau_loqo(point({1, 1}), point({1, 3}), 2.0, 0.05, 1e-8) ==
        doctest::Approx(3.4295));
  CHECK(update_tau_loqo(point({1e-12, 1}), point({1e-12, 1e-12}), 2.0, 0.05, 1e-8) >= 1e-8);
}

TEST_CASE("LOQO barrier rule") {
  CHECK(update_mu_loqo(point({2, 2}), point({2, 2}), 0.1, 0.95, 1e-11, true) == 1e-11);
  // Products (1, 1, 1, 3): ξ = 4·1/6 in classic-free average form.
  double xi = loqo_xi(point({1, 1}), point({1, 3}), true);
  CHECK(xi == doctest::Approx(4.0 / 6.0));
  double sigma = loqo_sigma(xi, 0.1, 0.95);
  CHECK(update_mu_loqo(point({1, 1}), point({1, 3}), 0.1, 0.95, 1e-11, true) ==
        doctest::Approx(sigma * 6.0 / 4.0));
  // Classic mode ignores the upper-level products.
  CHECK(loqo_xi(point({1, 1}), point({1, 3}), false) == 1.0);
  CHECK(update_mu_loqo(point({1, 1}), point({1, 3}), 0.1, 0.95, 1e-11, false) == 1e-11);
  CHECK(loqo_xi(point({1, 3}), Vec(), false) == doctest::Approx(0.5));
}

TEST_CASE("endgame psi examples") {
  CHECK(endgame_psi(1.0, 1.0, 1e-6, 1e-6, 1e-4) == doctest::Approx(5e-7));
  CHECK(endgame_psi(-1.0, 1.0, 1e-6, 1e-6, 1e-4) == 1e-4);
  CHECK(endgame_psi(0.0, 0.0, 1e-6, 1e-6, 1e-4) == 1e-4);
}

TEST_CASE("endgame step") {
  Vec d1 = Vec::Zero(2), d2 = Vec::Zero(2);
  endgame_step(point({1, 2}), point({0, 3}), point({1, 1}), point({1, 1}),
               point({1e-6, 1e-6}), 1e-6, 1e-8, 0.5, 1e-4, d1, d2);
  CHECK(d1.isZero());
  CHECK(d2.isZero());

  endgame_step(point({-1, 1}), point({1, -1}), point({1, 1}), point({1, 1}),
               point({1e-6, 1e-6}), 1e-6, 1e-8, 0.5, 1e-4, d1, d2);
  CHECK(d1[0] == 1e-4);
  CHECK(d2[0] == 0.0);
  CHECK(d1[1] == 0.0);
  CHECK(d2[1] == 1e-4);

  std::mt19937 rng(32);
  for (int t = 0; t < 1000; ++t) {
    Vec a = Vec::Zero(3), b = Vec::Zero(3);
    Vec before_a = a;
    endgame_step(random_vec(rng, 3), random_vec(rng, 3), random_vec(rng, 3, 0, 1),
                 random_vec(rng, 3, 0, 1), Vec::Constant(3, 1e-6), 1e-6,
                 uniform(rng, 0, 1e-6), 0.5, 1e-4, a, b);
    for (int i = 0; i < 3; ++i) {
      CHECK_FALSE((a[i] > 0 && b[i] > 0));
      CHECK(a[i] <= 1e-4);
      CHECK(b[i] <= 1e-4);
      CHECK(a[i] >= before_a[i]);
    }
  }
}

TEST_CASE("centered initialization") {
  CenteredStart c = centered_init(3, 0.1, 0.5);
  CHECK(c.x1[0] == doctest::Approx(std::sqrt(0.05)));
  CHECK(c.x2 == c.x1);
  CHECK(c.s[0] == doctest::Approx(0.05));
  Vec r6 = c.x1.cwiseProduct(c.x2) + c.s - Vec::Constant(3, 0.1);
  CHECK(r6.lpNorm<Eigen::Infinity>() <= 1e-17);
  CenteredStart edge = centered_init(1, 0.1, 1.0);
  CHECK(edge.s[0] > 0.0);
}

TEST_CASE("relaxed residual at a solution and by finite differences") {
  // trivial-corner at the origin with zero multipliers except z = ∇f.
  StandardProblem sp = to_standard_form(builtin("trivial-corner"));
  Layout l{sp.n0(), sp.n_cc(), sp.m(), true};
  Iterate it;
  it.p = Vec::Zero(l.n_primal());
  it.y = Vec::Zero(l.n_rows());
  it.z = Vec::Zero(l.n_primal());
  it.z.head(l.n()) = sp.gradient(Vec::Zero(l.n()));
  for (const Vec& r : relaxed_kkt_residual(sp, it, 0.0, 0.0)) {
    CHECK(r.lpNorm<Eigen::Infinity>() == 0.0);
  }

  std::mt19937 rng(33);
  for (int t = 0; t < 30; ++t) {
    QpccData d = random_qpcc(rng, 8, 3, 2);
    StandardProblem p = standard(d);
    Layout lay{p.n0(), p.n_cc(), p.m(), true};
    Iterate x = random_interior(rng, lay);
    double tau = uniform(rng, 0.01, 1.0);
    RelaxNlp nlp(p);
    nlp.set_tau(tau);
    auto lag = [&](const Vec& q) {
      return nlp.objective(q) + x.y.dot(nlp.constraints(q)) - x.z.dot(q);
    };
    Vec g = finite_difference(lag, x.p);
    RelaxedResiduals r = relaxed_kkt_residual(p, x, 0.1, tau);
    Vec stacked(lay.n_primal());
    stacked << r[0], r[1], r[2], r[3];
    CHECK(rel_err(stacked, g) <= 1e-6);
    Vec r6 = x.x1(lay).cwiseProduct(x.x2(lay)) + x.s(lay) - Vec::Constant(lay.n_cc, tau);
    CHECK(rel_err(r[5], r6) <= 1e-15);
  }
}

TEST_CASE("relaxation solves the builtins") {
  SolveResult tc = relax("two-circle");
  CHECK(tc.status == Status::kSuccess);
  CHECK(tc.objective == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(tc.complementarity <= 1e-8);
  bool at_vertex = (std::abs(tc.original_x[0] - 1) < 1e-4 && std::abs(tc.original_x[1]) < 1e-4) ||
                   (std::abs(tc.original_x[1] - 1) < 1e-4 && std::abs(tc.original_x[0]) < 1e-4);
  CHECK(at_vertex);

  SolveResult bl = relax("bilinear-lpcc");
  CHECK(bl.status == Status::kSuccess);
  CHECK(bl.objective == doctest::Approx(-1.0).epsilon(1e-6));

  SolveResult tr = relax("trivial-corner");
  CHECK(tr.status == Status::kSuccess);
  CHECK(std::abs(tr.objective) <= 1e-6);
  CHECK(tr.original_x.lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("every rule keeps the homotopy floors and returns a W-stationary point") {
  const char* mus[] = {"monotone", "loqo", "quality"};
  const char* taus[] = {"rolloff", "proportional", "loqo"};
  for (const auto& name : builtin_names()) {
    for (const char* mu : mus) {
      for (const char* tau : taus) {
        Options o = with({{"barrier", mu}, {"relaxation_update", tau}});
        SolveResult r = relax(name, o);
        CAPTURE(name);
        CAPTURE(std::string(mu));
        CAPTURE(std::string(tau));
        for (const auto& rec : r.log) {
          CHECK(rec.mu >= 1e-11);
          CHECK(rec.tau >= 1e-8);
        }
        if (r.status == Status::kSuccess) {
          CHECK(r.complementarity <= 1e-8);
          CHECK(r.stationarity != Stationarity::kNone);
        }
      }
    }
  }
}

TEST_CASE("identity proportional coupling keeps tau equal to mu") {
  Options o = with({{"relaxation_update", "proportional"},
                    {"sigma_mu_ratio", "1"},
                    {"sigma_mu_exp", "1"},
                    {"sigma_min", "1e-20"}});
  SolveResult r = relax("two-circle", o);
  CHECK(r.status == Status::kSuccess);
  for (const auto& rec : r.log) CHECK(rec.tau == rec.mu);
}

TEST_CASE("quality rule directions superpose") {
  Options o = with({{"barrier", "quality"}});
  int checked = 0;
  SolveHooks hooks;
  hooks.on_iteration = [&](const IterationProbe& p) {
    if (!p.quality || !p.solver || !p.factorization) return;
    const QualityTrace& q = *p.quality;
    for (double s : {0.1, 0.5, 1.0}) {
      Vec direct = p.solver->solve_step(*p.factorization, *p.kkt, q.r_aff + s * q.r_cen);
      Vec blend = q.d_aff + s * q.d_cen;
      CHECK((direct - blend).norm() <= 1e-8 * std::max(1.0, direct.norm()));
    }
    ++checked;
  };
  SolveResult r = solve_relaxation(builtin("two-circle"), o, hooks);
  CHECK(r.status == Status::kSuccess);
  CHECK(checked > 0);
}

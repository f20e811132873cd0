#include <doctest.h>

#include "support.hpp"

using namespace mpcc;
using namespace mpcc::test;

namespace {

// min f over n0 plain variables and one pair, no rows.
MpccProblem linear_pair_problem(double c1, double c2) {
  MpccProblem p;
  p.n_cc = 1;
  p.objective = [=](const Vec& v) { return c1 * v[0] + c2 * v[1]; };
  p.gradient = [=](const Vec&) { return point({c1, c2}); };
  p.constraints = [](const Vec&) { return Vec(); };
  p.jacobian = [](const Vec&) { return std::vector<Triplet>{}; };
  p.hessian = [](const Vec&, const Vec&) { return std::vector<Triplet>{}; };
  p.finalize();
  return p;
}

bool pred_s(double a, double b, double t) { return a >= -t && b >= -t; }
bool pred_m(double a, double b, double t) {
  return (a > t && b > t) || std::abs(a * b) <= t;
}
bool pred_c(double a, double b, double t) { return a * b >= -t; }
bool pred_a(double a, double b, double t) { return a >= -t || b >= -t; }

}  // namespace

TEST_CASE("standard form of an already standard problem is the identity") {
  QpccData d;
  d.n = 3;
  d.Q = Mat::Identity(3, 3);
  d.q = point({1, -1, 0.5});
  d.A = Mat::Zero(0, 3);
  d.lb = Vec::Zero(3);
  d.ub = Vec::Constant(3, kInf);
  d.pairs = {{1, 2}};
  StandardProblem sp = standard(d);
  CHECK(sp.m() == 0);
  CHECK(sp.n() == 3);
  CHECK(sp.slack_index().empty());
  CHECK(sp.shift().isZero());
  CHECK(sp.map().isIdentity());
}

TEST_CASE("range row becomes two slack rows") {
  QpccData d;
  d.n = 2;
  d.Q = Mat::Zero(2, 2);
  d.q = point({1, 2});
  d.A = Mat(1, 2);
  d.A << 1, 1;
  d.lg = point({1});
  d.ug = point({3});
  d.lb = Vec::Zero(2);
  d.ub = Vec::Constant(2, kInf);
  MpccProblem p = to_mpcc(d);
  StandardProblem sp = to_standard_form(p);
  CHECK(sp.m() == 2);
  CHECK(sp.slack_index().size() == 2);
  std::mt19937 rng(1);
  for (int k = 0; k < 5; ++k) {
    double a = uniform(rng, 0.0, 1.0);
    double b = uniform(rng, 1.0 - a, 3.0 - a);
    Vec v = point({a, b});
    Vec x = sp.from_original(v);
    CHECK(x.minCoeff() >= 0.0);
    CHECK(sp.constraints(x).lpNorm<Eigen::Infinity>() <= 1e-14);
    CHECK(rel_err(sp.to_original(x), v) <= 1e-15);
    CHECK(sp.objective(x) == doctest::Approx(p.objective(v)).epsilon(1e-15));
  }
}

TEST_CASE("pair lower bound is shifted to zero") {
  QpccData d;
  d.n = 2;
  d.Q = Mat::Identity(2, 2);
  d.q = point({-1, 0.5});
  d.A = Mat::Zero(0, 2);
  d.lb = point({2, 0});
  d.ub = Vec::Constant(2, kInf);
  d.pairs = {{0, 1}};
  MpccProblem p = to_mpcc(d);
  StandardProblem sp = to_standard_form(p);
  CHECK(sp.shift()[0] == 2.0);
  std::mt19937 rng(2);
  for (int k = 0; k < 5; ++k) {
    Vec v = point({2.0 + uniform(rng, 0, 3), 0.0});
    Vec x = sp.from_original(v);
    CHECK(x[0] == doctest::Approx(v[0] - 2.0));
    CHECK(sp.objective(x) == doctest::Approx(p.objective(v)).epsilon(1e-15));
  }
}

TEST_CASE("inconsistent bounds are rejected with the index") {
  QpccData d;
  d.n = 3;
  d.Q = Mat::Identity(3, 3);
  d.q = Vec::Zero(3);
  d.A = Mat::Zero(0, 3);
  d.lb = Vec::Zero(3);
  d.ub = Vec::Constant(3, kInf);
  MpccProblem p = to_mpcc(d);
  p.lx0[1] = 2.0;
  p.ux0[1] = 1.0;
  try {
    to_standard_form(p);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInconsistentBounds);
    CHECK(e.index() == 1);
  }
}

TEST_CASE("round trip on builtins preserves feasibility and objective") {
  std::mt19937 rng(4);
  for (const auto& name : builtin_names()) {
    MpccProblem p = builtin(name);
    StandardProblem sp = to_standard_form(p);
    int accepted = 0;
    for (int trial = 0; trial < 2000 && accepted < 100; ++trial) {
      Vec v(p.n());
      for (int j = 0; j < p.n0; ++j)
        v[j] = uniform(rng, p.lx0[j], std::min(p.ux0[j], p.lx0[j] + 3.0));
      for (int i = 0; i < p.n_cc; ++i) {
        double hi1 = std::min(p.ux1[i], p.lx1[i] + 3.0);
        double hi2 = std::min(p.ux2[i], p.lx2[i] + 3.0);
        bool first = uniform_int(rng, 0, 1);
        v[p.n0 + i] = first ? uniform(rng, p.lx1[i], hi1) : p.lx1[i];
        v[p.n0 + p.n_cc + i] = first ? p.lx2[i] : uniform(rng, p.lx2[i], hi2);
      }
      if (p.m > 0) {
        // Equality rows: move the plain variables onto them.
        Vec g = p.constraints(v);
        Mat j = p.dense_jacobian(v);
        Vec target = g.cwiseMax(p.lg).cwiseMin(p.ug);
        if (p.n0 > 0) {
          Vec corr = j.leftCols(p.n0).completeOrthogonalDecomposition().solve(target - g);
          v.head(p.n0) += corr;
        }
        Vec g2 = p.constraints(v);
        bool ok = true;
        for (int r = 0; r < p.m; ++r)
          ok = ok && g2[r] >= p.lg[r] - 1e-12 && g2[r] <= p.ug[r] + 1e-12;
        for (int k = 0; k < p.n0; ++k) ok = ok && v[k] >= p.lx0[k] && v[k] <= p.ux0[k];
        if (!ok) continue;
      }
      ++accepted;
      Vec x = sp.from_original(v);
      CHECK(x.minCoeff() >= -1e-12);
      if (sp.m() > 0) CHECK(sp.constraints(x).lpNorm<Eigen::Infinity>() <= 1e-10);
      CHECK(rel_err(sp.to_original(x), v) <= 1e-14);
      CHECK(sp.objective(x) == doctest::Approx(p.objective(v)).epsilon(1e-13));
    }
    CHECK_MESSAGE(accepted == 100, name);
  }
}

TEST_CASE("index sets by definition") {
  IndexSets s = index_sets(point({1, 0}), point({0, 0}), 1e-9);
  CHECK(s.i_plus0 == std::vector<int>{0});
  CHECK(s.i_00 == std::vector<int>{1});
  CHECK(s.i_0plus.empty());
  s = index_sets(point({0}), point({3}), 1e-9);
  CHECK(s.i_0plus == std::vector<int>{0});
  try {
    index_sets(point({0.5}), point({0.5}), 1e-9);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kComplementarityInfeasible);
    CHECK(e.value() == 0.25);
  }
}

TEST_CASE("index sets partition the pairs") {
  std::mt19937 rng(5);
  for (int t = 0; t < 200; ++t) {
    int n = uniform_int(rng, 1, 8);
    Vec x1 = Vec::Zero(n), x2 = Vec::Zero(n);
    for (int i = 0; i < n; ++i) {
      int k = uniform_int(rng, 0, 2);
      if (k == 1) x1[i] = uniform(rng, 1e-3, 1);
      if (k == 2) x2[i] = uniform(rng, 1e-3, 1);
    }
    IndexSets s = index_sets(x1, x2, 1e-9);
    std::vector<int> all;
    for (auto* v : {&s.i_plus0, &s.i_0plus, &s.i_00}) all.insert(all.end(), v->begin(), v->end());
    std::sort(all.begin(), all.end());
    std::vector<int> expect(n);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(all == expect);
  }
}

TEST_CASE("classification of biactive sign patterns") {
  StandardProblem a = to_standard_form(linear_pair_problem(-1, -1));
  Vec x = Vec::Zero(2);
  IndexSets sets = index_sets(x.head(1), x.tail(1), 1e-9);
  MpccMultipliers m;
  m.y = Vec();
  m.z0 = Vec();
  m.zeta1 = point({-1});
  m.zeta2 = point({-1});
  CHECK(classify_stationarity(x, m, sets, a) == Stationarity::kC);

  StandardProblem b = to_standard_form(linear_pair_problem(1, 0));
  m.zeta1 = point({1});
  m.zeta2 = point({0});
  CHECK(classify_stationarity(x, m, sets, b) == Stationarity::kS);

  // Multipliers that do not balance the gradient fail W.
  m.zeta1 = point({0});
  CHECK(classify_stationarity(x, m, sets, b) == Stationarity::kNone);
}

TEST_CASE("no biactive pairs gives S at a weakly stationary point") {
  BuiltinInfo info = builtin_info("two-circle");
  StandardProblem sp = to_standard_form(info.problem);
  Vec x = sp.from_original(point({1, 0}));
  MpccMultipliers m = estimate_multipliers(sp, x);
  IndexSets sets = index_sets(x.segment(sp.n0(), 1), x.segment(sp.n0() + 1, 1), 1e-9);
  CHECK(sets.i_00.empty());
  CHECK(classify_stationarity(x, m, sets, sp) == Stationarity::kS);
}

TEST_CASE("classification respects the implication chain") {
  std::mt19937 rng(6);
  const double tol = 1e-6;
  auto draw = [&] {
    switch (uniform_int(rng, 0, 2)) {
      case 0: return 0.0;
      case 1: return uniform(rng, 0.01, 1.0);
      default: return -uniform(rng, 0.01, 1.0);
    }
  };
  for (int t = 0; t < 2000; ++t) {
    int n = uniform_int(rng, 1, 4);
    Vec z1(n), z2(n);
    for (int i = 0; i < n; ++i) {
      z1[i] = draw();
      z2[i] = draw();
    }
    std::vector<int> i00(n);
    std::iota(i00.begin(), i00.end(), 0);
    Stationarity label = classify_biactive(z1, z2, i00, tol);
    auto all = [&](bool (*p)(double, double, double)) {
      for (int i = 0; i < n; ++i)
        if (!p(z1[i], z2[i], tol)) return false;
      return true;
    };
    switch (label) {
      case Stationarity::kS:
        CHECK(all(pred_s));
        CHECK(all(pred_m));
        CHECK(all(pred_c));
        CHECK(all(pred_a));
        break;
      case Stationarity::kM:
        CHECK(all(pred_m));
        CHECK(all(pred_c));
        CHECK(!all(pred_s));
        break;
      case Stationarity::kC:
        CHECK(all(pred_c));
        CHECK(!all(pred_m));
        break;
      case Stationarity::kA:
        CHECK(all(pred_a));
        CHECK(!all(pred_c));
        break;
      case Stationarity::kW:
        CHECK(!all(pred_a));
        CHECK(!all(pred_c));
        break;
      default:
        FAIL("classify_biactive never returns none");
    }
  }
}

TEST_CASE("MPCC residual examples") {
  MpccProblem zero = linear_pair_problem(0, 0);
  StandardProblem sz = to_standard_form(zero);
  MpccMultipliers m;
  m.y = Vec();
  m.z0 = Vec();
  m.zeta1 = Vec::Zero(1);
  m.zeta2 = Vec::Zero(1);
  MpccResidual r = mpcc_kkt_residual(Vec::Zero(2), m, sz);
  CHECK(r.gradient.isZero());
  CHECK(r.complementarity.isZero());

  StandardProblem s1 = to_standard_form(linear_pair_problem(1, 1));
  m.zeta1 = point({1});
  m.zeta2 = point({1});
  r = mpcc_kkt_residual(Vec::Zero(2), m, s1);
  CHECK(r.gradient.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("MPCC Lagrangian gradient matches finite differences") {
  std::mt19937 rng(7);
  for (int t = 0; t < 30; ++t) {
    QpccData d = random_qpcc(rng, 8, 3, 2);
    StandardProblem sp = standard(d);
    Vec x = random_vec(rng, sp.n(), 0.1, 2.0);
    MpccMultipliers m;
    m.y = random_vec(rng, sp.m());
    m.z0 = random_vec(rng, sp.n0());
    m.zeta1 = random_vec(rng, sp.n_cc());
    m.zeta2 = random_vec(rng, sp.n_cc());
    Vec zfull(sp.n());
    zfull << m.z0, m.zeta1, m.zeta2;
    auto lag = [&](const Vec& v) {
      double l = sp.objective(v) - zfull.dot(v);
      if (sp.m() > 0) l += m.y.dot(sp.constraints(v));
      return l;
    };
    MpccResidual r = mpcc_kkt_residual(x, m, sp);
    CHECK(rel_err(r.gradient, finite_difference(lag, x)) <= 1e-6);
  }
}

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "mpcc/linalg.hpp"
#include "support.hpp"

using namespace mpcc;
using namespace mpcc::test;

namespace {

Inertia oracle_inertia(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
  Inertia in;
  for (int i = 0; i < a.rows(); ++i) {
    double ev = es.eigenvalues()[i];
    if (ev > 0) ++in.n_pos;
    else if (ev < 0) ++in.n_neg;
    else ++in.n_zero;
  }
  return in;
}

// Plain KKT [[H + I, Jᵀ], [J, 0]] with unit distances and multipliers.
AugmentedKkt plain_kkt(const Mat& h, const Mat& j) {
  Layout l{static_cast<int>(h.rows()), 0, static_cast<int>(j.rows()), false};
  const int n = static_cast<int>(h.rows());
  return assemble_kkt(KktShape::kPlain, l, h, j, Vec::Ones(n), Vec::Ones(n), Vec());
}

// One pair (x1, x2) with unit distances; relaxation layout with one slack.
Iterate unit_pair_iterate(double ys) {
  Iterate it;
  it.p = Vec::Ones(3);
  it.z = Vec::Ones(3);
  it.y = point({ys});
  return it;
}

StandardProblem pair_problem(const Mat& q) {
  QpccData d;
  d.n = 2;
  d.Q = q;
  d.q = Vec::Zero(2);
  d.A = Mat::Zero(0, 2);
  d.lb = Vec::Zero(2);
  d.ub = Vec::Constant(2, kInf);
  d.pairs = {{0, 1}};
  return standard(d);
}

}  // namespace

TEST_CASE("inertia of small diagonal matrices") {
  LdltFactorization f(Mat(Vec(point({1, -1})).asDiagonal()));
  CHECK(f.inertia() == Inertia{1, 1, 0});
  CHECK(f.success());
  LdltFactorization g(Mat(Vec(point({2, 3, 0})).asDiagonal()));
  CHECK(g.inertia().n_zero == 1);
  CHECK_FALSE(g.success());
}

TEST_CASE("inertia matches a dense eigensolver") {
  std::mt19937 rng(11);
  for (int t = 0; t < 50; ++t) {
    Mat a = random_mat(rng, 20, 20);
    a = (a + a.transpose()).eval();
    LdltFactorization f(a);
    CHECK(f.inertia() == oracle_inertia(a));
    CHECK(f.inertia() == eigen_inertia(a));
  }
  // Duplicated rows and columns with integer entries: the second copy of
  // each row eliminates to an exact zero.
  for (int t = 0; t < 20; ++t) {
    Mat s = Mat::Zero(10, 10);
    for (int i = 0; i < 10; ++i)
      for (int j = i; j < 10; ++j) s(i, j) = s(j, i) = uniform_int(rng, -4, 4);
    Mat a(20, 20);
    a << s, s, s, s;
    LdltFactorization f(a);
    CHECK(f.inertia() == eigen_inertia(a, 1e-9 * a.norm()));
    CHECK(f.inertia().n_zero >= 10);
  }
}

TEST_CASE("factorization solves reproduce the right-hand side") {
  std::mt19937 rng(12);
  for (int t = 0; t < 30; ++t) {
    int n = uniform_int(rng, 1, 30);
    Mat a = random_mat(rng, n, n);
    a = (a + a.transpose()).eval();
    LdltFactorization f(a);
    if (!f.success()) continue;
    Vec b = random_vec(rng, n);
    Vec x = f.solve(b);
    CHECK((a * x - b).norm() <= 1e-8 * (1 + b.norm()) * a.norm() * x.norm());
  }
}

TEST_CASE("solve_step examples") {
  KktSolver solver;
  AugmentedKkt id = plain_kkt(Mat::Zero(3, 3), Mat::Zero(0, 3));
  CHECK(id.matrix().isIdentity());
  LdltFactorization f = solver.factorize(id);
  Vec d = solver.solve_step(f, id, Vec::Ones(3));
  CHECK(d.isApprox(-Vec::Ones(3)));
  CHECK(solver.solve_step(f, id, Vec::Zero(3)).isZero());

  std::mt19937 rng(13);
  for (int t = 0; t < 20; ++t) {
    Mat b = random_mat(rng, 10, 10);
    Mat spd = b * b.transpose();
    AugmentedKkt k = plain_kkt(spd, Mat::Zero(0, 10));
    LdltFactorization fk = solver.factorize(k);
    Vec r = random_vec(rng, 10);
    Vec step = solver.solve_step(fk, k, r);
    Vec oracle = k.matrix().fullPivLu().solve(-r);
    CHECK(rel_err(step, oracle) <= 1e-10 * std::max(1.0, oracle.norm()));
  }
}

TEST_CASE("solve_step residual after refinement") {
  std::mt19937 rng(14);
  KktSolver solver;
  for (int t = 0; t < 50; ++t) {
    int n = uniform_int(rng, 2, 12);
    int m = uniform_int(rng, 0, n - 1);
    Mat h = random_mat(rng, n, n);
    h = (h + h.transpose()).eval();
    AugmentedKkt k = plain_kkt(h, random_mat(rng, m, n));
    LdltFactorization f = solver.factorize(k);
    if (!f.success()) continue;
    Vec r = random_vec(rng, n + m);
    bool degraded = false;
    Vec d = solver.solve_step(f, k, r, &degraded);
    if (!degraded) {
      CHECK((k.matrix() * d + r).lpNorm<Eigen::Infinity>() <=
            1e-8 * (1 + r.lpNorm<Eigen::Infinity>()));
    }
  }
}

TEST_CASE("relaxation Q block from the iterate") {
  StandardProblem sp = pair_problem(Mat::Zero(2, 2));
  AugmentedKkt k = assemble_relaxation_kkt(unit_pair_iterate(0.5), sp);
  Mat m = k.matrix();
  CHECK(m(0, 0) == 1.0);
  CHECK(m(1, 1) == 1.0);
  CHECK(m(0, 1) == 0.5);
  CHECK(m(1, 0) == 0.5);
  CHECK(k.target() == Inertia{3, 1, 0});

  AugmentedKkt k0 = assemble_relaxation_kkt(unit_pair_iterate(0.0), sp);
  CHECK(k0.matrix()(0, 1) == 0.0);
}

TEST_CASE("non-interior iterate names the component") {
  StandardProblem sp = pair_problem(Mat::Zero(2, 2));
  Iterate it = unit_pair_iterate(0.5);
  it.p[1] = 0.0;
  try {
    assemble_relaxation_kkt(it, sp);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonInterior);
    CHECK(e.index() == 1);
  }
}

TEST_CASE("penalty Q block and symmetry") {
  StandardProblem sp = pair_problem(Mat::Zero(2, 2));
  Iterate it;
  it.p = Vec::Ones(2);
  it.z = Vec::Ones(2);
  it.y = Vec();
  AugmentedKkt k = assemble_penalty_kkt(it, sp, 2.0);
  Mat m = k.matrix();
  CHECK(m(0, 1) == 2.0);
  CHECK(m(0, 0) == 1.0);
  CHECK(assemble_penalty_kkt(it, sp, 0.0).matrix().isDiagonal());

  std::mt19937 rng(15);
  for (int t = 0; t < 20; ++t) {
    StandardProblem r = standard(random_qpcc(rng, 8, 3, 2));
    Layout l{r.n0(), r.n_cc(), r.m(), false};
    Iterate ri = random_interior(rng, l);
    Mat km = assemble_penalty_kkt(ri, r, uniform(rng, 0, 10)).matrix();
    CHECK((km - km.transpose()).norm() == 0.0);
  }
}

TEST_CASE("augmented matrix is the unreduced system with the bound rows eliminated") {
  std::mt19937 rng(16);
  for (int t = 0; t < 20; ++t) {
    QpccData d = random_qpcc(rng, 4, 1, 1);
    if (d.pairs.empty() || d.A.rows() == 0) continue;
    StandardProblem sp = standard(d);
    Layout l{sp.n0(), sp.n_cc(), sp.m(), true};
    Iterate it = random_interior(rng, l);
    AugmentedKkt k = assemble_relaxation_kkt(it, sp);
    const int n = l.n();
    const int np = l.n_primal();
    Mat h = Mat::Zero(np, np);
    h.topLeftCorner(n, n) = sp.hessian(it.p.head(n), it.y.head(l.m));
    for (int i = 0; i < l.n_cc; ++i) {
      h(l.x1(i), l.x2(i)) += it.y[l.m + i];
      h(l.x2(i), l.x1(i)) += it.y[l.m + i];
    }
    h.diagonal() += it.z.cwiseQuotient(it.p);
    Vec v = random_vec(rng, np + l.n_rows());
    Vec expect(np + l.n_rows());
    expect.head(np) = h * v.head(np) + k.jacobian.transpose() * v.tail(l.n_rows());
    expect.tail(l.n_rows()) = k.jacobian * v.head(np);
    CHECK(rel_err(k.matrix() * v, expect) <= 1e-12);
  }
}

TEST_CASE("bound multiplier recovery") {
  Vec dz = recover_bound_multiplier_steps(point({1}), point({2}), point({0}), 2.0);
  CHECK(dz[0] == 0.0);
  for (double dx : {-0.5, 0.0, 0.25, 3.0}) {
    Vec r = recover_bound_multiplier_steps(point({1}), point({2}), point({dx}), 1.0);
    CHECK(r[0] == doctest::Approx(-(1.0 + 2.0 * dx)));
  }
}

TEST_CASE("reduced solve agrees with the unreduced system") {
  std::mt19937 rng(17);
  for (int t = 0; t < 100; ++t) {
    CHECK(reduction_trial(rng) <= 1e-8);
  }
}

TEST_CASE("critical Q-regularization examples") {
  StandardProblem sp = pair_problem(Mat::Zero(2, 2));
  AugmentedKkt k = assemble_relaxation_kkt(unit_pair_iterate(0.5), sp);
  CHECK(q_regularize_critical(k, 0.999) == 0);
  CHECK(k.q12[0] == 0.5);

  AugmentedKkt big = assemble_relaxation_kkt(unit_pair_iterate(5.0), sp);
  CHECK(q_regularize_critical(big, 0.999) == 1);
  CHECK(big.q12[0] == doctest::Approx(0.999));
  Eigen::SelfAdjointEigenSolver<Mat> es(big.matrix().topLeftCorner(2, 2));
  CHECK(es.eigenvalues()[0] == doctest::Approx(0.001));
  CHECK(es.eigenvalues()[1] == doctest::Approx(1.999));

  AugmentedKkt neg = assemble_relaxation_kkt(unit_pair_iterate(-5.0), sp);
  q_regularize_critical(neg, 0.999);
  CHECK(neg.q12[0] == doctest::Approx(-0.999));

  AugmentedKkt zero = assemble_relaxation_kkt(unit_pair_iterate(0.0), sp);
  CHECK(q_regularize_critical(zero, 0.999) == 0);
}

TEST_CASE("eigen-clip Q-regularization examples") {
  double a = 1, b = 0, c = 1;
  clip_block(a, b, c, 1e-8);
  CHECK(a == doctest::Approx(1));
  CHECK(b == doctest::Approx(0));
  CHECK(c == doctest::Approx(1));

  a = 0, b = 1, c = 0;
  clip_block(a, b, c, 1e-8);
  CHECK(a == doctest::Approx(0.5));
  CHECK(b == doctest::Approx(0.5));
  CHECK(c == doctest::Approx(0.5));
  Eigen::Matrix2d m;
  m << a, b, b, c;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
  CHECK(es.eigenvalues()[0] == doctest::Approx(1e-8).epsilon(1e-6));
  CHECK(es.eigenvalues()[1] == doctest::Approx(1.0));

  a = 2, b = 3, c = 2;
  clip_block(a, b, c, 1e-8);
  double lmin = 0.5 * (a + c) - std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  CHECK(lmin >= 1e-8 - 1e-14);
}

TEST_CASE("regularized blocks are positive definite on random data") {
  std::mt19937 rng(18);
  for (int t = 0; t < 2000; ++t) {
    AugmentedKkt k;
    k.q11 = Vec::Constant(1, std::exp(uniform(rng, -10, 10)));
    k.q22 = Vec::Constant(1, std::exp(uniform(rng, -10, 10)));
    k.q12 = Vec::Constant(1, uniform(rng, -1, 1) * std::exp(uniform(rng, -10, 10)));
    double alpha = uniform(rng, 0.1, 0.9999);
    q_regularize_critical(k, alpha);
    CHECK(k.q11[0] * k.q22[0] > k.q12[0] * k.q12[0]);
    CHECK(k.q11[0] + k.q22[0] > 0);

    AugmentedKkt e;
    e.q11 = Vec::Constant(1, uniform(rng, -5, 5));
    e.q22 = Vec::Constant(1, uniform(rng, -5, 5));
    e.q12 = Vec::Constant(1, uniform(rng, -5, 5));
    double lmin = std::exp(uniform(rng, -20, 0));
    q_regularize_eig(e, lmin);
    Eigen::Matrix2d m;
    m << e.q11[0], e.q12[0], e.q12[0], e.q22[0];
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(m).eigenvalues()[0] >= lmin - 1e-14);
  }
}

TEST_CASE("inertia correction stages") {
  // Correct inertia from the start: one factorization, no shifts.
  KktSolver solver;
  AugmentedKkt good = plain_kkt(Mat::Identity(3, 3), Mat(Vec(point({1, 1, 0})).transpose()));
  CorrectionResult r = solver.inertia_correct(good, 0.1);
  CHECK(r.factorizations == 1);
  CHECK(r.delta_w == 0.0);
  CHECK(r.delta_c == 0.0);
  CHECK(r.inertia_ok);

  // Convex objective, indefinite Q from a large coupling: Q-regularization
  // alone fixes it.
  StandardProblem sp = pair_problem(Mat::Identity(2, 2));
  AugmentedKkt q = assemble_relaxation_kkt(unit_pair_iterate(50.0), sp);
  KktSolver s2;
  CorrectionResult rq = s2.inertia_correct(q, 0.1);
  CHECK(rq.factorizations == 2);
  CHECK(rq.inertia_ok);
  CHECK(rq.delta_w == 0.0);
  CHECK(rq.factorization.inertia() == q.target());

  // Duplicated rows: the Jacobian is rank deficient and needs δ_c.
  Mat j(2, 3);
  j << 1, 1, 0, 1, 1, 0;
  AugmentedKkt dup = plain_kkt(Mat::Identity(3, 3), j);
  KktSolver s3;
  CorrectionResult rd = s3.inertia_correct(dup, 0.1);
  CHECK(rd.inertia_ok);
  CHECK(rd.delta_c > 0.0);
  CHECK(rd.factorization.inertia() == dup.target());
  CHECK(oracle_inertia(dup.matrix()) == dup.target());
}

TEST_CASE("inertia correction reaches the target on random instances") {
  std::mt19937 rng(19);
  for (int t = 0; t < 50; ++t) {
    int n = uniform_int(rng, 2, 10);
    int m = uniform_int(rng, 0, n);
    Mat h = random_mat(rng, n, n);
    h = (h + h.transpose()).eval() * 3.0;
    Mat j = random_mat(rng, m, n);
    if (m >= 2 && uniform_int(rng, 0, 1)) j.row(1) = j.row(0);
    AugmentedKkt k = plain_kkt(h, j);
    KktSolver solver;
    CorrectionResult r = solver.inertia_correct(k, 0.01);
    CHECK(r.inertia_ok);
    CHECK(r.factorization.inertia() == k.target());
    CHECK(oracle_inertia(k.matrix()) == k.target());
  }
}

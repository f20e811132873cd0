#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

#include <Eigen/LU>
#include <Eigen/QR>

#include "mpcc/bench.hpp"
#include "mpcc/crossover.hpp"
#include "mpcc/iterate.hpp"
#include "mpcc/linalg.hpp"

namespace mpcc::test {

inline double uniform(std::mt19937& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Vec random_vec(std::mt19937& rng, int n, double lo = -1.0, double hi = 1.0) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

inline Mat random_mat(std::mt19937& rng, int r, int c) {
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = uniform(rng, -1.0, 1.0);
  return m;
}

/// Convex QPCC with n <= n_max, m <= m_max general rows (mixed equality and
/// range rows) and n_cc <= ncc_max pairs on the leading variables.
inline QpccData random_qpcc(std::mt19937& rng, int n_max = 10, int m_max = 3,
                            int ncc_max = 2) {
  QpccData d;
  int ncc = uniform_int(rng, 0, ncc_max);
  d.n = uniform_int(rng, std::max(2 * ncc, 1), n_max);
  int m = uniform_int(rng, 0, m_max);
  Mat b = random_mat(rng, d.n, d.n);
  d.Q = b.transpose() * b + 0.1 * Mat::Identity(d.n, d.n);
  d.Q = (0.5 * (d.Q + d.Q.transpose())).eval();
  d.q = random_vec(rng, d.n);
  d.A = random_mat(rng, m, d.n);
  d.lg.resize(m);
  d.ug.resize(m);
  for (int r = 0; r < m; ++r) {
    d.lg[r] = uniform(rng, -1.0, 0.0);
    d.ug[r] = uniform_int(rng, 0, 1) ? d.lg[r] : d.lg[r] + 2.0;
  }
  d.lb = Vec::Zero(d.n);
  d.ub = Vec::Constant(d.n, kInf);
  for (int i = 0; i < ncc; ++i) d.pairs.emplace_back(2 * i, 2 * i + 1);
  return d;
}

inline StandardProblem standard(const QpccData& d) {
  return to_standard_form(to_mpcc(d));
}

/// Strictly interior primal-dual point for the given layout.
inline Iterate random_interior(std::mt19937& rng, const Layout& l) {
  Iterate it;
  it.p = random_vec(rng, l.n_primal(), 0.2, 2.0);
  it.y = random_vec(rng, l.n_rows());
  it.z = random_vec(rng, l.n_primal(), 0.2, 2.0);
  return it;
}

inline Vec finite_difference(const std::function<double(const Vec&)>& f,
                             const Vec& x, double h = 1e-6) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

inline double rel_err(const Vec& a, const Vec& b) {
  return (a - b).lpNorm<Eigen::Infinity>() /
         std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

/// LPCC instance at a complementary point: n = n0 + 2 n_cc <= 8,
/// n_cc <= 4, up to two linearized rows with c = 0 (so d = 0 is feasible).
inline LpecInstance random_lpcc(std::mt19937& rng) {
  LpecInstance l;
  l.n_cc = uniform_int(rng, 1, 4);
  l.n0 = uniform_int(rng, 0, 8 - 2 * l.n_cc);
  const int n = l.n0 + 2 * l.n_cc;
  const int m = uniform_int(rng, 0, 2);
  l.x = Vec::Zero(n);
  for (int i = 0; i < l.n0; ++i) l.x[i] = uniform(rng, 0.0, 1.0);
  for (int i = 0; i < l.n_cc; ++i) {
    double v = uniform(rng, -1.0, 1.0);
    if (v > 0.3) {
      l.x[l.n0 + i] = uniform(rng, 0.0, 1.0);
    } else if (v > -0.4) {
      l.x[l.n0 + l.n_cc + i] = uniform(rng, 0.0, 1.0);
    }
  }
  l.grad = random_vec(rng, n);
  l.jac = random_mat(rng, m, n);
  l.c = Vec::Zero(m);
  l.sets = index_sets(l.x.segment(l.n0, l.n_cc),
                      l.x.segment(l.n0 + l.n_cc, l.n_cc), 1e-6);
  l.delta = uniform(rng, 0.5, 1.5);
  return l;
}

inline Vec point(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

/// Random convex relaxation instance (n <= 10, m <= 3, n_cc <= 2): solves
/// the unreduced Newton system densely and compares with the augmented
/// solve plus recovered bound-multiplier steps. Returns the relative error.
inline double reduction_trial(std::mt19937& rng) {
  QpccData d = random_qpcc(rng, 10, 3, 2);
  StandardProblem sp = standard(d);
  Layout l{sp.n0(), sp.n_cc(), sp.m(), true};
  const int n = l.n();
  const int np = l.n_primal();
  const int nr = l.n_rows();
  Iterate it = random_interior(rng, l);
  const double mu = uniform(rng, 1e-3, 1.0);
  Vec x = it.p.head(n);

  Mat h = Mat::Zero(np, np);
  h.topLeftCorner(n, n) = sp.hessian(x, it.y.head(l.m));
  Mat j = Mat::Zero(nr, np);
  if (l.m > 0) j.topLeftCorner(l.m, n) = sp.jacobian(x);
  for (int i = 0; i < l.n_cc; ++i) {
    h(l.x1(i), l.x2(i)) += it.y[l.m + i];
    h(l.x2(i), l.x1(i)) += it.y[l.m + i];
    j(l.m + i, l.x1(i)) = x[l.x2(i)];
    j(l.m + i, l.x2(i)) = x[l.x1(i)];
    j(l.m + i, l.s(i)) = 1.0;
  }
  const Vec& w = it.p;
  const Vec& z = it.z;
  Vec r_d = random_vec(rng, np);
  Vec r_p = random_vec(rng, nr);
  Vec r_c = w.cwiseProduct(z).array() - mu;

  const int order = 2 * np + nr;
  Mat u = Mat::Zero(order, order);
  u.block(0, 0, np, np) = h;
  u.block(0, np, np, nr) = j.transpose();
  u.block(0, np + nr, np, np) = -Mat::Identity(np, np);
  u.block(np, 0, nr, np) = j;
  u.block(np + nr, 0, np, np) = z.asDiagonal();
  u.block(np + nr, np + nr, np, np) = w.asDiagonal();
  Vec rhs(order);
  rhs << r_d, r_p, r_c;
  Vec full = u.fullPivLu().solve(-rhs);

  AugmentedKkt kkt = assemble_relaxation_kkt(it, sp);
  KktSolver solver;
  LdltFactorization f = solver.factorize(kkt);
  Vec red(np + nr);
  red << r_d + r_c.cwiseQuotient(w), r_p;
  Vec dpy = solver.solve_step(f, kkt, red);
  Vec dz = recover_bound_multiplier_steps(w, z, dpy.head(np), mu);
  Vec mine(order);
  mine << dpy, dz;
  return (mine - full).norm() / std::max(1e-300, full.norm());
}

}  // namespace mpcc::test

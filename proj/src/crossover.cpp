#include "mpcc/crossover.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/QR>
#include <fmt/format.h>

#include "engine.hpp"
#include "mpcc/relax.hpp"

namespace mpcc {

namespace {

double inf_norm(const Vec& v) {
  return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0;
}

constexpr double kFeasTol = 1e-8;
constexpr double kSnapTol = 1e-7;
constexpr int kMaxMinor = 40;

Settings lp_settings() {
  Settings s = Settings::from_options(Options{}, Algorithm::kRelaxation);
  s.tol = 1e-10;
  s.max_iter = 500;
  return s;
}

struct LpSolve {
  bool ok = false;
  Vec d;
};

// One interior-point solve of min gᵀd, A d = b, lo <= d <= hi.
LpSolve ipm_lp(const Vec& g, const Mat& a, const Vec& b, const Vec& lo,
               const Vec& hi) {
  const int n = static_cast<int>(g.size());
  const int m = static_cast<int>(a.rows());
  MpccProblem p;
  p.n0 = n;
  p.m = m;
  p.lx0 = lo;
  p.ux0 = hi;
  p.lg = b;
  p.ug = b;
  p.start = Vec::Zero(n);
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(lo[j]) && std::isfinite(hi[j])) {
      p.start[j] = 0.5 * (lo[j] + hi[j]);
    } else if (std::isfinite(lo[j])) {
      p.start[j] = lo[j] + 1.0;
    } else if (std::isfinite(hi[j])) {
      p.start[j] = hi[j] - 1.0;
    }
  }
  p.objective = [g](const Vec& v) { return g.dot(v); };
  p.gradient = [g](const Vec&) -> Vec { return g; };
  p.constraints = [a](const Vec& v) -> Vec { return a * v; };
  std::vector<Triplet> jac;
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < n; ++c) {
      if (a(r, c) != 0.0) {
        jac.push_back({r, c, a(r, c)});
      }
    }
  }
  p.jacobian = [jac](const Vec&) { return jac; };
  p.hessian = [](const Vec&, const Vec&) { return std::vector<Triplet>{}; };
  p.finalize();
  StandardProblem sp = to_standard_form(p);
  PlainNlp nlp(sp);
  SolveResult r = solve_nlp(nlp, lp_settings(), sp.start());
  LpSolve out;
  out.d = sp.to_original(r.x);
  out.ok = r.status == Status::kSuccess;
  return out;
}

bool lp_feasible(const Mat& a, const Vec& b, const Vec& lo, const Vec& hi,
                 const Vec& d) {
  for (int j = 0; j < d.size(); ++j) {
    if (d[j] < lo[j] - kFeasTol || d[j] > hi[j] + kFeasTol) {
      return false;
    }
  }
  return a.rows() == 0 ||
         inf_norm(a * d - b) <= kFeasTol * (1.0 + inf_norm(b));
}

// Moves near-active bounds onto the bound and restores A d = b on the rest.
Vec vertex_cleanup(const Vec& g, const Mat& a, const Vec& b, const Vec& lo,
                   const Vec& hi, const Vec& d) {
  const int n = static_cast<int>(d.size());
  Vec out = d;
  std::vector<int> free;
  for (int j = 0; j < n; ++j) {
    if (d[j] - lo[j] <= kSnapTol * (1.0 + std::abs(lo[j]))) {
      out[j] = lo[j];
    } else if (hi[j] - d[j] <= kSnapTol * (1.0 + std::abs(hi[j]))) {
      out[j] = hi[j];
    } else {
      free.push_back(j);
    }
  }
  if (a.rows() > 0 && !free.empty()) {
    Mat af(a.rows(), static_cast<int>(free.size()));
    for (size_t k = 0; k < free.size(); ++k) {
      af.col(static_cast<int>(k)) = a.col(free[k]);
    }
    Vec corr = af.completeOrthogonalDecomposition().solve(b - a * out);
    for (size_t k = 0; k < free.size(); ++k) {
      out[free[k]] += corr[static_cast<int>(k)];
    }
  }
  for (int j = 0; j < n; ++j) {
    if (out[j] < lo[j] || out[j] > hi[j]) {
      return d;
    }
  }
  const double res = a.rows() ? inf_norm(a * out - b) : 0.0;
  const double res0 = a.rows() ? inf_norm(a * d - b) : 0.0;
  if (res > std::max(res0, 1e-12 * (1.0 + inf_norm(b)))) {
    return d;
  }
  if (g.dot(out) > g.dot(d) + 1e-9 * (1.0 + std::abs(g.dot(d)))) {
    return d;
  }
  return out;
}

// Branch LP of an LPEC: d with the given components fixed at -x.
BoxLpResult branch_lp(const LpecInstance& lpec, const std::vector<int>& fixed) {
  const int n = static_cast<int>(lpec.x.size());
  Vec lo(n), hi(n);
  for (int j = 0; j < n; ++j) {
    lo[j] = std::max(-lpec.x[j], -lpec.delta);
    hi[j] = lpec.delta;
  }
  for (int j : fixed) {
    if (lpec.x[j] > lpec.delta) {
      return {};
    }
    lo[j] = hi[j] = -lpec.x[j];
  }
  return solve_box_lp(lpec.grad, lpec.jac, -lpec.c, lo, hi);
}

// Pairs whose side is chosen by the branch: biactive ones plus any pair
// with both members positive.
std::vector<int> open_pairs(const LpecInstance& lpec) {
  std::vector<int> open = lpec.sets.i_00;
  std::vector<int> assigned(lpec.n_cc, 0);
  for (int i : lpec.sets.i_00) assigned[i] = 1;
  for (int i : lpec.sets.i_0plus) assigned[i] = 1;
  for (int i : lpec.sets.i_plus0) assigned[i] = 1;
  for (int i = 0; i < lpec.n_cc; ++i) {
    if (!assigned[i]) {
      open.push_back(i);
    }
  }
  std::sort(open.begin(), open.end());
  return open;
}

std::vector<int> forced_fixed(const LpecInstance& lpec) {
  std::vector<int> fixed;
  for (int i : lpec.sets.i_0plus) {
    fixed.push_back(lpec.n0 + i);
  }
  for (int i : lpec.sets.i_plus0) {
    fixed.push_back(lpec.n0 + lpec.n_cc + i);
  }
  return fixed;
}

Branch branch_of_step(const LpecInstance& lpec, const Vec& d) {
  Vec v = lpec.x + d;
  return branch_from_point(v.segment(lpec.n0, lpec.n_cc),
                           v.segment(lpec.n0 + lpec.n_cc, lpec.n_cc));
}

// The zero step solves the LPEC: it is feasible and no step decreases the
// linear model by more than d_tol relative to the gradient.
bool lpec_zero(const LpecInstance& lpec, const LpecSolution& sol,
               double d_tol) {
  if (!sol.feasible) {
    return false;
  }
  if (inf_norm(sol.d) <= d_tol) {
    return true;
  }
  if (inf_norm(lpec.c) > kFeasTol) {
    return false;
  }
  for (int j : forced_fixed(lpec)) {
    if (std::abs(lpec.x[j]) > kFeasTol) {
      return false;
    }
  }
  return -sol.objective <= d_tol * std::max(1.0, inf_norm(lpec.grad));
}

Vec embed(const std::vector<int>& free, int n, const Vec& u) {
  Vec x = Vec::Zero(n);
  for (size_t k = 0; k < free.size(); ++k) {
    x[free[k]] = u[static_cast<int>(k)];
  }
  return x;
}

Vec restrict_to(const std::vector<int>& free, const Vec& x) {
  Vec u(static_cast<int>(free.size()));
  for (size_t k = 0; k < free.size(); ++k) {
    u[static_cast<int>(k)] = x[free[k]];
  }
  return u;
}

Mat columns(const Mat& m, const std::vector<int>& cols) {
  Mat out(m.rows(), static_cast<int>(cols.size()));
  for (size_t k = 0; k < cols.size(); ++k) {
    out.col(static_cast<int>(k)) = m.col(cols[k]);
  }
  return out;
}

class BranchNlp : public Nlp {
 public:
  BranchNlp(const StandardProblem& problem, std::vector<int> free)
      : problem_(problem), free_(std::move(free)) {}

  Layout layout() const override {
    Layout l;
    l.n0 = static_cast<int>(free_.size());
    l.m = problem_.m();
    return l;
  }
  double objective(const Vec& u) const override {
    return problem_.objective(full(u));
  }
  Vec gradient(const Vec& u) const override {
    return restrict_to(free_, problem_.gradient(full(u)));
  }
  Vec constraints(const Vec& u) const override {
    return problem_.constraints(full(u));
  }
  Mat jacobian(const Vec& u) const override {
    return columns(problem_.jacobian(full(u)), free_);
  }
  Mat hessian(const Vec& u, const Vec& y) const override {
    Mat h = problem_.hessian(full(u), y);
    const int k = static_cast<int>(free_.size());
    Mat out(k, k);
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) {
        out(r, c) = h(free_[r], free_[c]);
      }
    }
    return out;
  }
  Vec full(const Vec& u) const { return embed(free_, problem_.n(), u); }

 private:
  const StandardProblem& problem_;
  std::vector<int> free_;
};

// min Σ(pp + nn) + ζ/2 ‖D(u - u0)‖²  s.t.  c(u) - pp + nn = 0.
class FeasibilityNlp : public Nlp {
 public:
  FeasibilityNlp(const Nlp& inner, Vec u0, double zeta)
      : inner_(inner), u0_(std::move(u0)), zeta_(zeta) {
    nu_ = static_cast<int>(u0_.size());
    m_ = inner_.layout().m;
    d2_ = u0_.cwiseAbs().cwiseMax(1.0).cwiseInverse().cwiseAbs2();
  }
  Layout layout() const override {
    Layout l;
    l.n0 = nu_ + 2 * m_;
    l.m = m_;
    return l;
  }
  double objective(const Vec& q) const override {
    Vec du = q.head(nu_) - u0_;
    return q.tail(2 * m_).sum() + 0.5 * zeta_ * du.cwiseProduct(d2_).dot(du);
  }
  Vec gradient(const Vec& q) const override {
    Vec g(nu_ + 2 * m_);
    g.head(nu_) = zeta_ * d2_.cwiseProduct(q.head(nu_) - u0_);
    g.tail(2 * m_).setOnes();
    return g;
  }
  Vec constraints(const Vec& q) const override {
    return inner_.constraints(q.head(nu_)) - q.segment(nu_, m_) +
           q.tail(m_);
  }
  Mat jacobian(const Vec& q) const override {
    Mat j = Mat::Zero(m_, nu_ + 2 * m_);
    j.leftCols(nu_) = inner_.jacobian(q.head(nu_));
    j.block(0, nu_, m_, m_) = -Mat::Identity(m_, m_);
    j.rightCols(m_) = Mat::Identity(m_, m_);
    return j;
  }
  Mat hessian(const Vec& q, const Vec& y) const override {
    Mat h = Mat::Zero(nu_ + 2 * m_, nu_ + 2 * m_);
    h.topLeftCorner(nu_, nu_) = inner_.hessian(q.head(nu_), y) -
                                inner_.hessian(q.head(nu_), Vec::Zero(m_));
    h.topLeftCorner(nu_, nu_).diagonal() += zeta_ * d2_;
    return h;
  }

 private:
  const Nlp& inner_;
  Vec u0_;
  Vec d2_;
  double zeta_;
  int nu_ = 0;
  int m_ = 0;
};

// Moves free components the solve identified as active (x_j < z_j, or at
// the bound up to roundoff) onto the bound and restores c(x) = 0 on the rest.
Vec polish(const StandardProblem& problem, const Vec& x, const Vec& z,
           const std::vector<int>& free) {
  Vec cand = x;
  const double c0 = inf_norm(problem.constraints(x));
  std::vector<int> keep;
  for (size_t k = 0; k < free.size(); ++k) {
    const int j = free[k];
    const double zk = k < static_cast<size_t>(z.size()) ? z[static_cast<int>(k)] : 0.0;
    if (cand[j] <= kSnapTol || cand[j] < zk) {
      cand[j] = 0.0;
    } else {
      keep.push_back(j);
    }
  }
  if (keep.size() == free.size()) {
    return x;
  }
  for (int iter = 0; iter < 5 && problem.m() > 0 && !keep.empty(); ++iter) {
    Vec r = problem.constraints(cand);
    if (inf_norm(r) <= 1e-15) {
      break;
    }
    Mat jf = columns(problem.jacobian(cand), keep);
    Vec step = jf.completeOrthogonalDecomposition().solve(-r);
    for (size_t k = 0; k < keep.size(); ++k) {
      cand[keep[k]] += step[static_cast<int>(k)];
    }
  }
  for (int j : keep) {
    if (!(cand[j] >= 0.0)) {
      return x;
    }
  }
  const double c1 = inf_norm(problem.constraints(cand));
  if (!(c1 <= std::max(c0, 1e-12))) {
    return x;
  }
  const double f0 = problem.objective(x);
  if (problem.objective(cand) > f0 + 1e-9 * std::max(1.0, std::abs(f0))) {
    return x;
  }
  return cand;
}

LpecSolution solve_lpec(const LpecInstance& lpec, const Settings& s) {
  if (s.lpec_relaxed) {
    return solve_lpec_relaxed(lpec);
  }
  try {
    return solve_lpec_enumerate(lpec, s.enum_cap);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kCapExceeded) {
      throw;
    }
    return solve_lpec_relaxed(lpec);
  }
}

}  // namespace

bool Branch::valid(int n_cc) const {
  std::vector<int> seen(n_cc, 0);
  for (const auto* set : {&i1, &i2}) {
    for (int i : *set) {
      if (i < 0 || i >= n_cc || seen[i]++) {
        return false;
      }
    }
  }
  return static_cast<int>(i1.size() + i2.size()) == n_cc;
}

Branch branch_from_point(const Vec& x1, const Vec& x2) {
  Branch b;
  for (int i = 0; i < x1.size(); ++i) {
    (x1[i] >= x2[i] ? b.i1 : b.i2).push_back(i);
  }
  return b;
}

LpecInstance make_lpec(const StandardProblem& problem, const Vec& x,
                       double delta, double index_tol) {
  if (!(delta > 0.0)) {
    throw Error(ErrorCode::kInvalidProblem, "LPEC trust radius must be positive");
  }
  LpecInstance l;
  l.n0 = problem.n0();
  l.n_cc = problem.n_cc();
  l.x = x;
  l.grad = problem.gradient(x);
  l.c = problem.constraints(x);
  l.jac = problem.jacobian(x);
  l.sets = index_sets(x.segment(l.n0, l.n_cc), x.segment(l.n0 + l.n_cc, l.n_cc),
                      index_tol);
  l.delta = delta;
  return l;
}

double lpec_objective(const LpecInstance& lpec, const Vec& d) {
  return lpec.grad.dot(d);
}

BoxLpResult solve_box_lp(const Vec& g, const Mat& a, const Vec& b,
                         const Vec& lo, const Vec& hi) {
  const int n = static_cast<int>(g.size());
  BoxLpResult out;
  for (int j = 0; j < n; ++j) {
    if (lo[j] > hi[j]) {
      return out;
    }
  }
  if (n == 0) {
    out.feasible = a.rows() == 0 || inf_norm(b) <= kFeasTol;
    out.d = Vec();
    return out;
  }
  LpSolve r = ipm_lp(g, a, b, lo, hi);
  if (r.ok && lp_feasible(a, b, lo, hi, r.d)) {
    out.feasible = true;
    out.d = vertex_cleanup(g, a, b, lo, hi, r.d);
    out.objective = g.dot(out.d);
    return out;
  }
  // Phase one decides feasibility: min Σ(p + n), A d + p - n = b.
  const int m = static_cast<int>(a.rows());
  Vec g1 = Vec::Zero(n + 2 * m);
  g1.tail(2 * m).setOnes();
  Mat a1(m, n + 2 * m);
  a1 << a, Mat::Identity(m, m), -Mat::Identity(m, m);
  Vec lo1(n + 2 * m), hi1(n + 2 * m);
  lo1 << lo, Vec::Zero(2 * m);
  hi1 << hi, Vec::Constant(2 * m, kInf);
  LpSolve p1 = ipm_lp(g1, a1, b, lo1, hi1);
  Vec d = p1.d.head(n);
  if (lp_feasible(a, b, lo, hi, d)) {
    out.feasible = true;
    out.d = d;
    out.objective = g.dot(d);
  }
  return out;
}

// An optimal face that contains d = 0 returns the zero step itself.
static void prefer_zero_step(const LpecInstance& lpec, LpecSolution& sol) {
  if (!sol.feasible || sol.d.size() == 0 || inf_norm(lpec.c) > kFeasTol) {
    return;
  }
  for (int j : forced_fixed(lpec)) {
    if (lpec.x[j] != 0.0) {
      return;
    }
  }
  const double tie = 1e-12 * (1.0 + inf_norm(lpec.grad) * lpec.delta);
  if (sol.objective >= -tie) {
    sol.d.setZero();
    sol.objective = 0.0;
    sol.branch = branch_of_step(lpec, sol.d);
  }
}

LpecSolution solve_lpec_enumerate(const LpecInstance& lpec, int cap) {
  const std::vector<int> open = open_pairs(lpec);
  const int k = static_cast<int>(open.size());
  if (k > cap) {
    throw Error(ErrorCode::kCapExceeded,
                fmt::format("{} undecided pairs exceed the enumeration cap {}; "
                            "use the relaxation LPCC solver",
                            k, cap));
  }
  const std::vector<int> base = forced_fixed(lpec);
  LpecSolution best;
  for (unsigned long mask = 0; mask < (1ul << k); ++mask) {
    std::vector<int> fixed = base;
    for (int b = 0; b < k; ++b) {
      // Most significant bit is the first open pair; 0 puts it in i1.
      bool in_i2 = (mask >> (k - 1 - b)) & 1ul;
      int i = open[b];
      fixed.push_back(in_i2 ? lpec.n0 + i : lpec.n0 + lpec.n_cc + i);
    }
    BoxLpResult lp = branch_lp(lpec, fixed);
    ++best.lps;
    if (!lp.feasible) {
      continue;
    }
    const double tie = 1e-12 * (1.0 + std::abs(best.objective));
    if (!best.feasible || lp.objective < best.objective - tie) {
      best.feasible = true;
      best.d = lp.d;
      best.objective = lp.objective;
    }
  }
  if (best.feasible) {
    best.branch = branch_of_step(lpec, best.d);
  }
  prefer_zero_step(lpec, best);
  return best;
}

LpecSolution solve_lpec_relaxed(const LpecInstance& lpec,
                                const Options& options) {
  const int n = static_cast<int>(lpec.x.size());
  const std::vector<int> open = open_pairs(lpec);
  const int k = static_cast<int>(open.size());
  const double dl = lpec.delta;
  // Problem variables: (plain d components, d1 of open pairs, d2 of open pairs).
  std::vector<int> is_open_member(n, 0);
  for (int i : open) {
    is_open_member[lpec.n0 + i] = 1;
    is_open_member[lpec.n0 + lpec.n_cc + i] = 1;
  }
  std::vector<int> order;
  for (int j = 0; j < n; ++j) {
    if (!is_open_member[j]) {
      order.push_back(j);
    }
  }
  const int n0 = static_cast<int>(order.size());
  for (int i : open) order.push_back(lpec.n0 + i);
  for (int i : open) order.push_back(lpec.n0 + lpec.n_cc + i);

  Vec lo(n), hi(n);
  for (int j = 0; j < n; ++j) {
    lo[j] = std::max(-lpec.x[j], -dl);
    hi[j] = dl;
  }
  for (int j : forced_fixed(lpec)) {
    lo[j] = hi[j] = -lpec.x[j];
  }
  Mat a = lpec.jac;
  Vec lg = -lpec.c;
  Vec ug = -lpec.c;
  // Pair members keep the complementarity shift -x; a trust bound that is
  // tighter than it becomes a row.
  std::vector<std::pair<int, double>> extra;
  for (int t = n0; t < n; ++t) {
    int j = order[t];
    lo[j] = -lpec.x[j];
    if (-lpec.x[j] < -dl) {
      extra.emplace_back(j, -dl);
    }
  }
  const int m0 = static_cast<int>(a.rows());
  const int m = m0 + static_cast<int>(extra.size());
  Mat af = Mat::Zero(m, n);
  af.topRows(m0) = a;
  Vec lgf(m), ugf(m);
  lgf.head(m0) = lg;
  ugf.head(m0) = ug;
  for (size_t e = 0; e < extra.size(); ++e) {
    af(m0 + static_cast<int>(e), extra[e].first) = 1.0;
    lgf[m0 + static_cast<int>(e)] = extra[e].second;
    ugf[m0 + static_cast<int>(e)] = kInf;
  }
  Mat ap(m, n);
  Vec gp(n), lop(n), hip(n);
  for (int t = 0; t < n; ++t) {
    ap.col(t) = af.col(order[t]);
    gp[t] = lpec.grad[order[t]];
    lop[t] = lo[order[t]];
    hip[t] = hi[order[t]];
  }
  MpccProblem p;
  p.n0 = n0;
  p.n_cc = k;
  p.m = m;
  p.lg = lgf;
  p.ug = ugf;
  p.lx0 = lop.head(n0);
  p.ux0 = hip.head(n0);
  p.lx1 = lop.segment(n0, k);
  p.ux1 = hip.segment(n0, k);
  p.lx2 = lop.tail(k);
  p.ux2 = hip.tail(k);
  p.objective = [gp](const Vec& v) { return gp.dot(v); };
  p.gradient = [gp](const Vec&) -> Vec { return gp; };
  p.constraints = [ap](const Vec& v) -> Vec { return ap * v; };
  std::vector<Triplet> jac;
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < n; ++c) {
      if (ap(r, c) != 0.0) {
        jac.push_back({r, c, ap(r, c)});
      }
    }
  }
  p.jacobian = [jac](const Vec&) { return jac; };
  p.hessian = [](const Vec&, const Vec&) { return std::vector<Triplet>{}; };
  p.finalize();

  SolveResult r = solve_relaxation(p, options);
  Vec d(n);
  for (int t = 0; t < n; ++t) {
    d[order[t]] = r.original_x[t];
  }
  LpecSolution out;
  out.branch = branch_of_step(lpec, d);
  // Re-solve the identified branch for an exactly complementary step, then
  // flip undecided pairs while that lowers the objective.
  auto fixed_for = [&](const Branch& b) {
    std::vector<int> fixed = forced_fixed(lpec);
    for (int i : b.i1) fixed.push_back(lpec.n0 + lpec.n_cc + i);
    for (int i : b.i2) fixed.push_back(lpec.n0 + i);
    return fixed;
  };
  Branch current = out.branch;
  BoxLpResult best = branch_lp(lpec, fixed_for(current));
  out.lps = 1;
  // Neighborhood: every branch within two flips of the current one.
  std::vector<std::vector<int>> moves;
  for (int a = 0; a < k; ++a) {
    moves.push_back({open[a]});
  }
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      moves.push_back({open[a], open[b]});
    }
  }
  for (int pass = 0; pass <= k; ++pass) {
    bool improved = false;
    for (const auto& move : moves) {
      Branch trial;
      for (int t = 0; t < lpec.n_cc; ++t) {
        bool in_i1 = std::find(current.i1.begin(), current.i1.end(), t) !=
                     current.i1.end();
        if (std::find(move.begin(), move.end(), t) != move.end()) {
          in_i1 = !in_i1;
        }
        (in_i1 ? trial.i1 : trial.i2).push_back(t);
      }
      BoxLpResult lp = branch_lp(lpec, fixed_for(trial));
      ++out.lps;
      if (lp.feasible &&
          (!best.feasible ||
           lp.objective < best.objective - 1e-12 * (1.0 + std::abs(best.objective)))) {
        best = lp;
        current = trial;
        improved = true;
      }
    }
    if (!improved) {
      break;
    }
  }
  if (best.feasible) {
    out.feasible = true;
    out.d = best.d;
    out.objective = best.objective;
    out.branch = branch_of_step(lpec, out.d);
  } else if (r.status == Status::kSuccess) {
    out.feasible = true;
    out.d = d;
    out.objective = lpec.grad.dot(d);
  }
  prefer_zero_step(lpec, out);
  return out;
}

LpecSolution proj_lpec(const StandardProblem& problem, const Vec& x,
                       double delta, int cap) {
  LpecInstance lpec;
  lpec.n0 = problem.n0();
  lpec.n_cc = problem.n_cc();
  lpec.x = x;
  lpec.grad = problem.gradient(x);
  lpec.c = problem.constraints(x);
  lpec.jac = problem.jacobian(x);
  lpec.delta = delta;
  const int ncc = lpec.n_cc;
  auto fixed_for = [&](const Branch& b) {
    std::vector<int> fixed;
    for (int i : b.i1) fixed.push_back(lpec.n0 + ncc + i);
    for (int i : b.i2) fixed.push_back(lpec.n0 + i);
    return fixed;
  };
  const Branch naive = branch_from_point(x.segment(lpec.n0, ncc),
                                         x.segment(lpec.n0 + ncc, ncc));
  LpecSolution out;
  auto attempt = [&](const Branch& b) {
    BoxLpResult lp = branch_lp(lpec, fixed_for(b));
    ++out.lps;
    if (lp.feasible) {
      out.feasible = true;
      out.d = lp.d;
      out.objective = lp.objective;
      out.branch = branch_of_step(lpec, lp.d);
    }
    return lp.feasible;
  };
  if (attempt(naive)) {
    return out;
  }
  if (ncc > cap) {
    throw Error(ErrorCode::kCapExceeded,
                fmt::format("projection over {} pairs exceeds the cap {}", ncc, cap));
  }
  for (unsigned long mask = 0; mask < (1ul << ncc); ++mask) {
    Branch b;
    for (int i = 0; i < ncc; ++i) {
      ((mask >> (ncc - 1 - i)) & 1ul ? b.i2 : b.i1).push_back(i);
    }
    if (b == naive) {
      continue;
    }
    if (attempt(b)) {
      return out;
    }
  }
  return out;
}

BnlpResult solve_bnlp(const Branch& branch, const Vec& x_init,
                      const StandardProblem& problem, const Settings& settings,
                      double gamma) {
  const int ncc = problem.n_cc();
  if (!branch.valid(ncc)) {
    throw Error(ErrorCode::kInvalidProblem, "branch is not a partition of the pairs");
  }
  const int n = problem.n();
  std::vector<int> is_fixed(n, 0);
  for (int i : branch.i1) is_fixed[problem.n0() + ncc + i] = 1;
  for (int i : branch.i2) is_fixed[problem.n0() + i] = 1;
  std::vector<int> free;
  for (int j = 0; j < n; ++j) {
    if (!is_fixed[j]) {
      free.push_back(j);
    }
  }
  BranchNlp nlp(problem, free);
  Vec u0 = push_from_bounds(restrict_to(free, x_init));

  Settings s = settings;
  if (problem.m() > 0 && std::isfinite(gamma) &&
      inf_norm(nlp.constraints(u0)) > gamma) {
    // Feasibility pre-phase, stopped once the violation is within gamma.
    FeasibilityNlp fnlp(nlp, u0, 1e-4);
    const int m = problem.m();
    Iterate it;
    it.p.resize(u0.size() + 2 * m);
    it.p.head(u0.size()) = u0;
    Vec h = nlp.constraints(u0);
    it.p.segment(u0.size(), m) = h.cwiseMax(0.0).array() + 1e-2;
    it.p.tail(m) = (-h).cwiseMax(0.0).array() + 1e-2;
    it.z = Vec::Ones(it.p.size());
    detail::EngineConfig cfg;
    cfg.settings = s;
    cfg.settings.mu_rule = MuRule::kMonotone;
    cfg.allow_restoration = false;
    cfg.stop = [&](const Iterate& i) {
      return inf_norm(nlp.constraints(i.p.head(u0.size()))) <= gamma;
    };
    SolveResult fr = detail::run_engine(fnlp, cfg, it, {});
    Vec u = fr.iterate.p.head(u0.size());
    if (!(inf_norm(nlp.constraints(u)) <= gamma)) {
      throw Error(ErrorCode::kBranchInfeasible,
                  fmt::format("branch start violation {:.3e} above budget {:.3e}",
                              inf_norm(nlp.constraints(u)), gamma));
    }
    u0 = push_from_bounds(u);
  }

  SolveResult r = solve_nlp(nlp, s, u0);
  BnlpResult out;
  out.status = r.status;
  out.iterations = r.iterations;
  if (r.status != Status::kSuccess) {
    throw Error(ErrorCode::kBranchInfeasible,
                fmt::format("branch NLP ended with status {} (violation {:.3e})",
                            to_string(r.status), r.report.constraint_violation));
  }
  out.feasible = true;
  out.x = polish(problem, nlp.full(r.x), r.iterate.z, free);
  out.objective = problem.objective(out.x);
  return out;
}

ActiveSetResult active_set_method(const Vec& x0, const Branch& branch0,
                                  double delta0, const StandardProblem& problem,
                                  const Settings& s) {
  ActiveSetResult res;
  res.x = x0;
  res.branch = branch0;
  res.objective = problem.objective(x0);
  double delta = delta0;
  int row = 0;
  for (int major = 0; major < s.crossover_max_iter; ++major) {
    bool accepted = false;
    for (int minor = 0; minor < kMaxMinor; ++minor) {
      LpecInstance lpec = make_lpec(problem, res.x, delta, s.index_set_tol);
      LpecSolution sol = solve_lpec(lpec, s);
      ++res.lpecs;
      CrossoverRow r;
      r.iter = row++;
      r.lpecs = res.lpecs;
      r.bnlps = res.bnlps;
      r.biactive = static_cast<int>(lpec.sets.i_00.size());
      r.delta = delta;
      r.step_norm = sol.feasible ? inf_norm(sol.d) : kInf;
      if (!sol.feasible) {
        r.description = "LPEC infeasible";
        res.table.push_back(r);
        res.status = Status::kStalled;
        return res;
      }
      if (lpec_zero(lpec, sol, s.d_tol)) {
        r.step_norm = 0.0;
        r.description = "B-stationary";
        res.table.push_back(r);
        res.status = Status::kSuccess;
        res.b_stationary = true;
        return res;
      }
      double f_new = kInf;
      Vec x_new;
      try {
        BnlpResult bn = solve_bnlp(sol.branch, res.x + sol.d, problem, s);
        f_new = bn.objective;
        x_new = bn.x;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kBranchInfeasible) {
          throw;
        }
      }
      ++res.bnlps;
      r.bnlps = res.bnlps;
      if (f_new < res.objective) {
        r.df = f_new - res.objective;
        r.description = "accept";
        res.table.push_back(r);
        res.x = x_new;
        res.objective = f_new;
        res.branch = sol.branch;
        res.accepted_objectives.push_back(f_new);
        ++res.accepted;
        delta *= 2.0;
        accepted = true;
        break;
      }
      r.description = std::isfinite(f_new) ? "reject" : "BNLP infeasible";
      res.table.push_back(r);
      delta *= 0.25;
    }
    if (!accepted) {
      res.status = Status::kStalled;
      return res;
    }
  }
  res.status = Status::kStalled;
  return res;
}

CrossoverResult crossover_driver(const Vec& x_hat,
                                 const StandardProblem& problem,
                                 const Settings& s) {
  CrossoverResult out;
  const int n0 = problem.n0();
  const int ncc = problem.n_cc();
  Vec xh = x_hat.cwiseMax(0.0);
  const double comp =
      inf_norm(xh.segment(n0, ncc).cwiseProduct(xh.segment(n0 + ncc, ncc)));
  double delta = s.alpha_delta *
                 std::max(inf_norm(problem.constraints(xh)), comp);
  delta = std::max(delta, s.d_tol);
  LpecSolution proj;
  int row = 0;
  while (delta <= s.delta_proj_max) {
    proj = proj_lpec(problem, xh, delta, s.enum_cap);
    CrossoverRow r;
    r.iter = row++;
    r.lpecs = row;
    r.delta = delta;
    r.step_norm = proj.feasible ? inf_norm(proj.d) : kInf;
    r.description = proj.feasible ? "projection" : "projection infeasible";
    out.table.push_back(r);
    if (proj.feasible) {
      break;
    }
    delta *= s.alpha_growth;
  }
  out.projection_delta = delta;
  if (!proj.feasible) {
    out.status = Status::kFailure;
    out.message = "no feasible projection within the largest radius";
    return out;
  }
  double gamma = delta;
  for (int j = 0; j < s.max_bnlp_tries; ++j) {
    BnlpResult bn;
    try {
      bn = solve_bnlp(proj.branch, xh, problem, s, gamma);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kBranchInfeasible) {
        throw;
      }
      CrossoverRow r;
      r.iter = row++;
      r.delta = gamma;
      r.bnlps = j + 1;
      r.description = "BNLP infeasible";
      out.table.push_back(r);
      gamma *= s.alpha_gamma;
      continue;
    }
    CrossoverRow r;
    r.iter = row++;
    r.bnlps = j + 1;
    r.delta = gamma;
    r.description = "BNLP start";
    out.table.push_back(r);
    out.active_set = active_set_method(bn.x, proj.branch, s.delta_verify,
                                       problem, s);
    for (CrossoverRow t : out.active_set.table) {
      t.iter = row++;
      out.table.push_back(t);
    }
    out.status = out.active_set.status;
    out.x = out.active_set.x;
    out.branch = out.active_set.branch;
    out.objective = out.active_set.objective;
    out.original_x = problem.to_original(out.x);
    out.complementarity = inf_norm(
        out.x.segment(n0, ncc).cwiseProduct(out.x.segment(n0 + ncc, ncc)));
    out.message = out.active_set.b_stationary ? "B-stationary" : "active-set stalled";
    return out;
  }
  out.status = Status::kFailure;
  out.message = "no branch NLP solved";
  return out;
}

CrossoverResult crossover_driver(const Vec& x_hat,
                                 const StandardProblem& problem,
                                 const Options& options) {
  return crossover_driver(
      x_hat, problem, Settings::from_options(options, Algorithm::kRelaxation));
}

std::string format_crossover_table(const std::vector<CrossoverRow>& rows) {
  std::string out = fmt::format("{:>4} {:>6} {:>6} {:>5} {:>10} {:>10} {:>11}  {}\n",
                                "Iter", "#LPCC", "#BNLP", "|I00|", "Delta",
                                "step", "Delta f", "description");
  for (const auto& r : rows) {
    out += fmt::format("{:>4} {:>6} {:>6} {:>5} {:>10.3e} {:>10.3e} {:>11.3e}  {}\n",
                       r.iter, r.lpecs, r.bnlps, r.biactive, r.delta,
                       r.step_norm, r.df, r.description);
  }
  return out;
}

}  // namespace mpcc

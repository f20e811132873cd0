#include "mpcc/model.hpp"

#include <cmath>
#include <algorithm>

#include <fmt/format.h>

namespace mpcc {

namespace {

void fill(Vec& v, int size, double value) {
  if (v.size() == 0) {
    v = Vec::Constant(size, value);
  }
}

void check_size(const Vec& v, int size, const char* name) {
  if (v.size() != size) {
    throw Error(ErrorCode::kInvalidProblem,
                fmt::format("{} has length {}, expected {}", name, v.size(),
                            size));
  }
}

void check_order(const Vec& lo, const Vec& hi, const char* name, int offset) {
  for (int i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i]) {
      throw Error(ErrorCode::kInconsistentBounds,
                  fmt::format("{} bounds inconsistent at index {}: {} > {}",
                              name, i + offset, lo[i], hi[i]),
                  i + offset, lo[i] - hi[i]);
    }
  }
}

}  // namespace

void MpccProblem::finalize() {
  fill(lg, m, -kInf);
  fill(ug, m, kInf);
  fill(lx0, n0, -kInf);
  fill(ux0, n0, kInf);
  fill(lx1, n_cc, 0.0);
  fill(lx2, n_cc, 0.0);
  fill(ux1, n_cc, kInf);
  fill(ux2, n_cc, kInf);
  validate();
}

void MpccProblem::validate() const {
  if (n0 < 0 || n_cc < 0 || m < 0) {
    throw Error(ErrorCode::kInvalidProblem, "negative dimension");
  }
  check_size(lg, m, "lg");
  check_size(ug, m, "ug");
  check_size(lx0, n0, "lx0");
  check_size(ux0, n0, "ux0");
  check_size(lx1, n_cc, "lx1");
  check_size(lx2, n_cc, "lx2");
  check_size(ux1, n_cc, "ux1");
  check_size(ux2, n_cc, "ux2");
  if (start.size() != 0) {
    check_size(start, n(), "start");
  }
  if (!objective || !gradient || !hessian) {
    throw Error(ErrorCode::kInvalidProblem, "missing objective evaluator");
  }
  if (m > 0 && (!constraints || !jacobian)) {
    throw Error(ErrorCode::kInvalidProblem, "missing constraint evaluator");
  }
  for (int i = 0; i < n_cc; ++i) {
    if (!std::isfinite(lx1[i]) || !std::isfinite(lx2[i])) {
      throw Error(ErrorCode::kInvalidProblem,
                  fmt::format("complementarity lower bound of pair {} must be "
                              "finite",
                              i),
                  i);
    }
  }
  check_order(lg, ug, "constraint", 0);
  check_order(lx0, ux0, "variable", 0);
  check_order(lx1, ux1, "variable", n0);
  check_order(lx2, ux2, "variable", n0 + n_cc);
}

Mat MpccProblem::dense_jacobian(const Vec& v) const {
  Mat jac = Mat::Zero(m, n());
  if (m == 0) {
    return jac;
  }
  for (const auto& t : jacobian(v)) {
    jac(t.row, t.col) += t.value;
  }
  return jac;
}

Mat MpccProblem::dense_hessian(const Vec& v, const Vec& y) const {
  Mat hess = Mat::Zero(n(), n());
  for (const auto& t : hessian(v, y)) {
    hess(t.row, t.col) += t.value;
    if (t.row != t.col) {
      hess(t.col, t.row) += t.value;
    }
  }
  return hess;
}

StandardProblem::StandardProblem(std::shared_ptr<const MpccProblem> original)
    : original_(std::move(original)) {
  const MpccProblem& p = *original_;
  p.validate();
  const int n_orig = p.n();

  // Count transformed ordinary variables and slacks first so the
  // complementarity block can sit at the end of x.
  int nv0 = 0;
  int n_slack = 0;
  for (int j = 0; j < p.n0; ++j) {
    bool lo = std::isfinite(p.lx0[j]);
    bool hi = std::isfinite(p.ux0[j]);
    if (lo && hi && p.lx0[j] == p.ux0[j]) {
      continue;
    }
    nv0 += (lo || hi) ? 1 : 2;
    n_slack += (lo && hi) ? 1 : 0;
  }
  for (int i = 0; i < p.n_cc; ++i) {
    n_slack += std::isfinite(p.ux1[i]) ? 1 : 0;
    n_slack += std::isfinite(p.ux2[i]) ? 1 : 0;
  }
  for (int j = 0; j < p.m; ++j) {
    bool lo = std::isfinite(p.lg[j]);
    bool hi = std::isfinite(p.ug[j]);
    if (lo && hi && p.lg[j] == p.ug[j]) {
      continue;
    }
    n_slack += (lo ? 1 : 0) + (hi ? 1 : 0);
  }
  n0_ = nv0 + n_slack;
  n_cc_ = p.n_cc;

  map_ = Mat::Zero(n_orig, n());
  shift_ = Vec::Zero(n_orig);
  int next_var = 0;
  int next_slack = nv0;

  auto add_bound_row = [&](int j, double upper) {
    Row row;
    row.constant = upper - shift_[j];
    for (int k = 0; k < n(); ++k) {
      if (map_(j, k) != 0.0) {
        row.linear.emplace_back(k, -map_(j, k));
      }
    }
    row.linear.emplace_back(next_slack, -1.0);
    slack_index_.push_back(next_slack++);
    rows_.push_back(std::move(row));
  };

  for (int j = 0; j < p.n0; ++j) {
    double l = p.lx0[j];
    double u = p.ux0[j];
    bool lo = std::isfinite(l);
    bool hi = std::isfinite(u);
    if (lo && hi && l == u) {
      shift_[j] = l;
    } else if (lo) {
      shift_[j] = l;
      map_(j, next_var++) = 1.0;
      if (hi) {
        add_bound_row(j, u);
      }
    } else if (hi) {
      shift_[j] = u;
      map_(j, next_var++) = -1.0;
    } else {
      free_source_.push_back(j);
      free_plus_.push_back(next_var);
      map_(j, next_var++) = 1.0;
      free_minus_.push_back(next_var);
      map_(j, next_var++) = -1.0;
    }
  }
  for (int i = 0; i < p.n_cc; ++i) {
    int j1 = p.n0 + i;
    int j2 = p.n0 + p.n_cc + i;
    shift_[j1] = p.lx1[i];
    shift_[j2] = p.lx2[i];
    map_(j1, n0_ + i) = 1.0;
    map_(j2, n0_ + n_cc_ + i) = 1.0;
  }
  for (int i = 0; i < p.n_cc; ++i) {
    if (std::isfinite(p.ux1[i])) {
      add_bound_row(p.n0 + i, p.ux1[i]);
    }
  }
  for (int i = 0; i < p.n_cc; ++i) {
    if (std::isfinite(p.ux2[i])) {
      add_bound_row(p.n0 + p.n_cc + i, p.ux2[i]);
    }
  }
  for (int j = 0; j < p.m; ++j) {
    double l = p.lg[j];
    double u = p.ug[j];
    bool lo = std::isfinite(l);
    bool hi = std::isfinite(u);
    if (lo && hi && l == u) {
      rows_.push_back(Row{j, 1.0, -l, {}});
      continue;
    }
    if (lo) {
      rows_.push_back(Row{j, 1.0, -l, {{next_slack, -1.0}}});
      slack_index_.push_back(next_slack++);
    }
    if (hi) {
      rows_.push_back(Row{j, -1.0, u, {{next_slack, -1.0}}});
      slack_index_.push_back(next_slack++);
    }
  }
}

Vec StandardProblem::to_original(const Vec& x) const { return shift_ + map_ * x; }

double StandardProblem::objective(const Vec& x) const {
  return original_->objective(to_original(x));
}

Vec StandardProblem::gradient(const Vec& x) const {
  return map_.transpose() * original_->gradient(to_original(x));
}

Vec StandardProblem::constraints(const Vec& x) const {
  Vec c(m());
  Vec g;
  if (original_->m > 0) {
    g = original_->constraints(to_original(x));
  }
  for (int r = 0; r < m(); ++r) {
    const Row& row = rows_[r];
    double value = row.constant;
    if (row.source >= 0) {
      value += row.sign * g[row.source];
    }
    for (const auto& [k, coef] : row.linear) {
      value += coef * x[k];
    }
    c[r] = value;
  }
  return c;
}

Mat StandardProblem::jacobian(const Vec& x) const {
  Mat jac = Mat::Zero(m(), n());
  Mat jg_std;
  if (original_->m > 0) {
    jg_std = original_->dense_jacobian(to_original(x)) * map_;
  }
  for (int r = 0; r < m(); ++r) {
    const Row& row = rows_[r];
    if (row.source >= 0) {
      jac.row(r) = row.sign * jg_std.row(row.source);
    }
    for (const auto& [k, coef] : row.linear) {
      jac(r, k) += coef;
    }
  }
  return jac;
}

Vec StandardProblem::original_multipliers(const Vec& y) const {
  Vec yo = Vec::Zero(original_->m);
  for (int r = 0; r < m(); ++r) {
    if (rows_[r].source >= 0) {
      yo[rows_[r].source] += rows_[r].sign * y[r];
    }
  }
  return yo;
}

Mat StandardProblem::hessian(const Vec& x, const Vec& y) const {
  Mat h = original_->dense_hessian(to_original(x), original_multipliers(y));
  return map_.transpose() * h * map_;
}

Vec StandardProblem::from_original(const Vec& v) const {
  Vec x = Vec::Zero(n());
  for (int k = 0; k < n(); ++k) {
    for (int j = 0; j < map_.rows(); ++j) {
      if (map_(j, k) != 0.0) {
        x[k] = (v[j] - shift_[j]) / map_(j, k);
        break;
      }
    }
  }
  for (size_t f = 0; f < free_source_.size(); ++f) {
    double value = v[free_source_[f]];
    x[free_plus_[f]] = std::max(value, 0.0);
    x[free_minus_[f]] = std::max(-value, 0.0);
  }
  // Each slack appears in exactly one row with coefficient -1.
  Vec c = constraints(x);
  for (int r = 0; r < m(); ++r) {
    for (const auto& [k, coef] : rows_[r].linear) {
      if (std::find(slack_index_.begin(), slack_index_.end(), k) !=
              slack_index_.end() &&
          coef == -1.0) {
        x[k] = c[r];
      }
    }
  }
  return x;
}

Vec StandardProblem::start() const {
  Vec v = original_->start.size() == original_->n()
              ? original_->start
              : Vec::Zero(original_->n());
  return from_original(v);
}

std::vector<int> StandardProblem::row_sources() const {
  std::vector<int> sources;
  sources.reserve(rows_.size());
  for (const auto& row : rows_) {
    sources.push_back(row.source);
  }
  return sources;
}

StandardProblem to_standard_form(const MpccProblem& problem) {
  return StandardProblem(std::make_shared<const MpccProblem>(problem));
}

StandardProblem to_standard_form(std::shared_ptr<const MpccProblem> problem) {
  return StandardProblem(std::move(problem));
}

IndexSets index_sets(const Vec& x1, const Vec& x2, double tol) {
  IndexSets sets;
  for (int i = 0; i < x1.size(); ++i) {
    bool big1 = x1[i] > tol;
    bool big2 = x2[i] > tol;
    if (big1 && big2) {
      throw Error(ErrorCode::kComplementarityInfeasible,
                  fmt::format("pair {} violates complementarity: x1*x2 = {}", i,
                              x1[i] * x2[i]),
                  i, x1[i] * x2[i]);
    }
    if (big1) {
      sets.i_plus0.push_back(i);
    } else if (big2) {
      sets.i_0plus.push_back(i);
    } else {
      sets.i_00.push_back(i);
    }
  }
  return sets;
}

std::string_view to_string(Stationarity label) {
  switch (label) {
    case Stationarity::kS:
      return "S";
    case Stationarity::kM:
      return "M";
    case Stationarity::kC:
      return "C";
    case Stationarity::kA:
      return "A";
    case Stationarity::kW:
      return "W";
    case Stationarity::kNone:
      return "none";
  }
  return "none";
}

MpccResidual mpcc_kkt_residual(const Vec& x, const MpccMultipliers& mult,
                               const StandardProblem& problem) {
  const int n0 = problem.n0();
  const int ncc = problem.n_cc();
  MpccResidual res;
  res.gradient = problem.gradient(x);
  if (problem.m() > 0) {
    res.gradient += problem.jacobian(x).transpose() * mult.y;
    res.constraints = problem.constraints(x);
  } else {
    res.constraints = Vec::Zero(0);
  }
  res.gradient.head(n0) -= mult.z0;
  res.gradient.segment(n0, ncc) -= mult.zeta1;
  res.gradient.tail(ncc) -= mult.zeta2;
  res.complementarity =
      x.segment(n0, ncc).cwiseProduct(x.tail(ncc));
  res.bound_complementarity = x.head(n0).cwiseProduct(mult.z0);
  return res;
}

Stationarity classify_biactive(const Vec& zeta1, const Vec& zeta2,
                               const std::vector<int>& i_00, double tol) {
  bool s = true;
  bool mm = true;
  bool c = true;
  bool a = true;
  for (int i : i_00) {
    double z1 = zeta1[i];
    double z2 = zeta2[i];
    s = s && z1 >= -tol && z2 >= -tol;
    mm = mm && ((z1 > tol && z2 > tol) || std::abs(z1 * z2) <= tol);
    c = c && z1 * z2 >= -tol;
    a = a && (z1 >= -tol || z2 >= -tol);
  }
  if (s) {
    return Stationarity::kS;
  }
  if (mm) {
    return Stationarity::kM;
  }
  if (c) {
    return Stationarity::kC;
  }
  if (a) {
    return Stationarity::kA;
  }
  return Stationarity::kW;
}

Stationarity classify_stationarity(const Vec& x, const MpccMultipliers& mult,
                                   const IndexSets& sets,
                                   const StandardProblem& problem,
                                   double tol) {
  const int n0 = problem.n0();
  MpccResidual res = mpcc_kkt_residual(x, mult, problem);
  auto inf_norm = [](const Vec& v) {
    return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
  };
  if (inf_norm(res.gradient) > tol || inf_norm(res.constraints) > tol ||
      inf_norm(res.bound_complementarity) > tol) {
    return Stationarity::kNone;
  }
  if (n0 > 0 && (x.head(n0).minCoeff() < -tol || mult.z0.minCoeff() < -tol)) {
    return Stationarity::kNone;
  }
  for (int i : sets.i_plus0) {
    if (std::abs(mult.zeta1[i]) > tol) {
      return Stationarity::kNone;
    }
  }
  for (int i : sets.i_0plus) {
    if (std::abs(mult.zeta2[i]) > tol) {
      return Stationarity::kNone;
    }
  }
  return classify_biactive(mult.zeta1, mult.zeta2, sets.i_00, tol);
}

}  // namespace mpcc

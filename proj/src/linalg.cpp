#include "mpcc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace mpcc {

namespace {

void count_block(Inertia& inertia, double a, double b, double c, double tol) {
  double det = a * c - b * b;
  double trace = a + c;
  if (std::abs(det) <= tol * tol) {
    // At least one zero eigenvalue.
    if (std::abs(trace) <= tol) {
      inertia.n_zero += 2;
    } else {
      inertia.n_zero += 1;
      (trace > 0 ? inertia.n_pos : inertia.n_neg) += 1;
    }
  } else if (det < 0) {
    inertia.n_pos += 1;
    inertia.n_neg += 1;
  } else if (trace > 0) {
    inertia.n_pos += 2;
  } else {
    inertia.n_neg += 2;
  }
}

}  // namespace

void LdltFactorization::compute(const Mat& a_in) {
  const int n = static_cast<int>(a_in.rows());
  Mat a = a_in.selfadjointView<Eigen::Lower>();
  l_ = Mat::Identity(n, n);
  d_diag_ = Vec::Zero(n);
  d_sub_ = Vec::Zero(n);
  block_.assign(n, 1);
  perm_.resize(n);
  std::iota(perm_.begin(), perm_.end(), 0);
  inertia_ = {};
  computed_ = true;
  if (n == 0) {
    return;
  }

  // A pivot is zero when it is roundoff relative to the diagonal entry it
  // started from plus everything eliminated into it.
  Vec mag = a.diagonal().cwiseAbs();
  const double scale = a.cwiseAbs().maxCoeff();
  const double floor_tol = 1e-300 + 1e-30 * scale;
  auto tol_at = [&](int i) { return std::max(1e-14 * mag[i], floor_tol); };
  const double alpha = (1.0 + std::sqrt(17.0)) / 8.0;

  auto swap_sym = [&](int i, int j, int k) {
    if (i == j) {
      return;
    }
    a.row(i).swap(a.row(j));
    a.col(i).swap(a.col(j));
    if (k > 0) {
      l_.row(i).head(k).swap(l_.row(j).head(k));
    }
    std::swap(perm_[i], perm_[j]);
    std::swap(mag[i], mag[j]);
  };

  int k = 0;
  while (k < n) {
    const int rem = n - k - 1;
    double akk = std::abs(a(k, k));
    int r = k;
    double lambda = 0.0;
    for (int i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > lambda) {
        lambda = std::abs(a(i, k));
        r = i;
      }
    }
    if (akk <= tol_at(k) && lambda <= floor_tol) {
      d_diag_[k] = a(k, k);
      inertia_.n_zero += 1;
      ++k;
      continue;
    }
    int size = 1;
    if (akk < alpha * lambda) {
      double sigma = 0.0;
      for (int j = k; j < n; ++j) {
        if (j != r) {
          sigma = std::max(sigma, std::abs(a(r, j)));
        }
      }
      if (akk * sigma >= alpha * lambda * lambda) {
        size = 1;
      } else if (std::abs(a(r, r)) >= alpha * sigma) {
        swap_sym(k, r, k);
      } else {
        swap_sym(k + 1, r, k);
        size = 2;
      }
    }
    if (size == 1) {
      double d = a(k, k);
      d_diag_[k] = d;
      if (std::abs(d) <= tol_at(k)) {
        inertia_.n_zero += 1;
      } else if (d > 0) {
        inertia_.n_pos += 1;
      } else {
        inertia_.n_neg += 1;
      }
      if (rem > 0) {
        Vec col = a.col(k).tail(rem);
        l_.col(k).tail(rem) = col / d;
        a.bottomRightCorner(rem, rem).noalias() -=
            l_.col(k).tail(rem) * col.transpose();
        mag.tail(rem) += l_.col(k).tail(rem).cwiseProduct(col).cwiseAbs();
      }
      k += 1;
    } else {
      double d00 = a(k, k);
      double d10 = a(k + 1, k);
      double d11 = a(k + 1, k + 1);
      double det = d00 * d11 - d10 * d10;
      d_diag_[k] = d00;
      d_diag_[k + 1] = d11;
      d_sub_[k] = d10;
      block_[k] = 2;
      block_[k + 1] = 0;
      count_block(inertia_, d00, d10, d11,
                  std::max({tol_at(k), tol_at(k + 1), 1e-14 * std::abs(d10)}));
      const int rem2 = n - k - 2;
      if (rem2 > 0) {
        Eigen::Matrix2d dinv;
        dinv << d11 / det, -d10 / det, -d10 / det, d00 / det;
        Mat m = a.block(k + 2, k, rem2, 2);
        l_.block(k + 2, k, rem2, 2) = m * dinv;
        a.bottomRightCorner(rem2, rem2).noalias() -=
            l_.block(k + 2, k, rem2, 2) * m.transpose();
        mag.tail(rem2) +=
            (l_.block(k + 2, k, rem2, 2).cwiseProduct(m)).cwiseAbs().rowwise().sum();
      }
      k += 2;
    }
  }
}

Vec LdltFactorization::solve(const Vec& b) const {
  const int n = order();
  Vec x(n);
  for (int k = 0; k < n; ++k) {
    x[k] = b[perm_[k]];
  }
  for (int k = 0; k < n; ++k) {
    if (k + 1 < n) {
      x.tail(n - k - 1).noalias() -= l_.col(k).tail(n - k - 1) * x[k];
    }
  }
  for (int k = 0; k < n;) {
    if (block_[k] == 2) {
      double d00 = d_diag_[k];
      double d10 = d_sub_[k];
      double d11 = d_diag_[k + 1];
      double det = d00 * d11 - d10 * d10;
      double b0 = x[k];
      double b1 = x[k + 1];
      x[k] = (d11 * b0 - d10 * b1) / det;
      x[k + 1] = (d00 * b1 - d10 * b0) / det;
      k += 2;
    } else {
      x[k] /= d_diag_[k];
      k += 1;
    }
  }
  for (int k = n - 1; k >= 0; --k) {
    if (k + 1 < n) {
      x[k] -= l_.col(k).tail(n - k - 1).dot(x.tail(n - k - 1));
    }
  }
  Vec out(n);
  for (int k = 0; k < n; ++k) {
    out[perm_[k]] = x[k];
  }
  return out;
}

Inertia eigen_inertia(const Mat& a, double tol) {
  Inertia inertia;
  if (a.rows() == 0) {
    return inertia;
  }
  Eigen::SelfAdjointEigenSolver<Mat> solver(a, Eigen::EigenvaluesOnly);
  for (int i = 0; i < a.rows(); ++i) {
    double ev = solver.eigenvalues()[i];
    if (std::abs(ev) <= tol) {
      inertia.n_zero += 1;
    } else if (ev > 0) {
      inertia.n_pos += 1;
    } else {
      inertia.n_neg += 1;
    }
  }
  return inertia;
}

Mat AugmentedKkt::matrix() const {
  const int np = n_primal();
  const int nr = n_rows();
  Mat k = Mat::Zero(np + nr, np + nr);
  k.topLeftCorner(np, np) = hessian;
  k.topLeftCorner(np, np).diagonal() += sigma;
  k.topLeftCorner(np, np).diagonal().array() += delta_w;
  for (int i = 0; i < q11.size(); ++i) {
    int i1 = layout.x1(i);
    int i2 = layout.x2(i);
    k(i1, i1) += q11[i];
    k(i2, i2) += q22[i];
    k(i1, i2) += q12[i];
    k(i2, i1) += q12[i];
  }
  k.bottomLeftCorner(nr, np) = jacobian;
  k.topRightCorner(np, nr) = jacobian.transpose();
  k.bottomRightCorner(nr, nr).diagonal().array() = -delta_c;
  return k;
}

AugmentedKkt assemble_kkt(KktShape shape, const Layout& layout,
                          const Mat& hessian, const Mat& jacobian,
                          const Vec& w, const Vec& z, const Vec& coupling) {
  const int np = static_cast<int>(w.size());
  for (int i = 0; i < np; ++i) {
    if (!(w[i] > 0.0) || !(z[i] > 0.0)) {
      throw Error(ErrorCode::kNonInterior,
                  fmt::format("iterate not interior at component {} "
                              "(distance {}, multiplier {})",
                              i, w[i], z[i]),
                  i, std::min(w[i], z[i]));
    }
  }
  AugmentedKkt kkt;
  kkt.shape = shape;
  kkt.layout = layout;
  kkt.hessian = hessian;
  kkt.jacobian = jacobian;
  kkt.sigma = z.cwiseQuotient(w);
  const int ncc = coupling.size() > 0 ? layout.n_cc : 0;
  kkt.q11.resize(ncc);
  kkt.q22.resize(ncc);
  kkt.q12 = coupling.head(ncc);
  for (int i = 0; i < ncc; ++i) {
    kkt.q11[i] = kkt.sigma[layout.x1(i)];
    kkt.q22[i] = kkt.sigma[layout.x2(i)];
    kkt.sigma[layout.x1(i)] = 0.0;
    kkt.sigma[layout.x2(i)] = 0.0;
  }
  return kkt;
}

namespace {

Vec distances(const Iterate& it, const Vec& delta) {
  Vec w = it.p;
  if (delta.size() > 0) {
    w.head(delta.size()) += delta;
  }
  return w;
}

}  // namespace

AugmentedKkt assemble_relaxation_kkt(const Iterate& it,
                                     const StandardProblem& problem,
                                     const Vec& delta) {
  Layout l{problem.n0(), problem.n_cc(), problem.m(), true};
  const int n = l.n();
  const int ncc = l.n_cc;
  Vec x = it.p.head(n);
  Mat h = Mat::Zero(l.n_primal(), l.n_primal());
  h.topLeftCorner(n, n) = problem.hessian(x, it.y.head(l.m));
  Mat jac = Mat::Zero(l.n_rows(), l.n_primal());
  if (l.m > 0) {
    jac.topLeftCorner(l.m, n) = problem.jacobian(x);
  }
  for (int i = 0; i < ncc; ++i) {
    jac(l.m + i, l.x1(i)) = x[l.x2(i)];
    jac(l.m + i, l.x2(i)) = x[l.x1(i)];
    jac(l.m + i, l.s(i)) = 1.0;
  }
  return assemble_kkt(KktShape::kRelaxation, l, h, jac, distances(it, delta),
                      it.z, it.y.segment(l.m, ncc));
}

AugmentedKkt assemble_penalty_kkt(const Iterate& it,
                                  const StandardProblem& problem, double rho,
                                  const Vec& delta) {
  Layout l{problem.n0(), problem.n_cc(), problem.m(), false};
  Vec x = it.p.head(l.n());
  Mat h = problem.hessian(x, it.y.head(l.m));
  Mat jac = l.m > 0 ? problem.jacobian(x) : Mat::Zero(0, l.n());
  return assemble_kkt(KktShape::kPenalty, l, h, jac, distances(it, delta),
                      it.z, Vec::Constant(l.n_cc, rho));
}

int q_regularize_critical(AugmentedKkt& kkt, double alpha) {
  int changed = 0;
  for (int i = 0; i < kkt.q12.size(); ++i) {
    double bound = alpha * std::sqrt(kkt.q11[i] * kkt.q22[i]);
    if (std::abs(kkt.q12[i]) > bound) {
      kkt.q12[i] = std::copysign(bound, kkt.q12[i]);
      ++changed;
    }
  }
  return changed;
}

void clip_block(double& a, double& b, double& c, double lambda_min) {
  double mean = 0.5 * (a + c);
  double radius = std::hypot(0.5 * (a - c), b);
  double hi = mean + radius;
  double lo = mean - radius;
  double theta = 0.5 * std::atan2(2.0 * b, a - c);
  double cs = std::cos(theta);
  double sn = std::sin(theta);
  hi = std::max(hi, lambda_min);
  lo = std::max(lo, lambda_min);
  a = hi * cs * cs + lo * sn * sn;
  c = hi * sn * sn + lo * cs * cs;
  b = (hi - lo) * cs * sn;
  // Guard against rounding in the reconstruction.
  for (int pass = 0; pass < 3; ++pass) {
    double m2 = 0.5 * (a + c);
    double r2 = std::hypot(0.5 * (a - c), b);
    double det = a * c - b * b;
    double small = m2 > 0 ? det / (m2 + r2) : m2 - r2;
    if (small >= lambda_min) {
      break;
    }
    double bump = lambda_min - small + 4.0 * std::numeric_limits<double>::epsilon() *
                                           (std::abs(m2) + r2);
    a += bump;
    c += bump;
  }
}

int q_regularize_eig(AugmentedKkt& kkt, double lambda_min) {
  int changed = 0;
  for (int i = 0; i < kkt.q12.size(); ++i) {
    double a = kkt.q11[i];
    double b = kkt.q12[i];
    double c = kkt.q22[i];
    double mean = 0.5 * (a + c);
    double radius = std::hypot(0.5 * (a - c), b);
    if (mean - radius >= lambda_min) {
      continue;
    }
    clip_block(a, b, c, lambda_min);
    kkt.q11[i] = a;
    kkt.q12[i] = b;
    kkt.q22[i] = c;
    ++changed;
  }
  return changed;
}

QRegularization parse_q_regularization(const std::string& name) {
  if (name == "critical_rho") {
    return QRegularization::kCritical;
  }
  if (name == "eigen_clip") {
    return QRegularization::kEigenClip;
  }
  return QRegularization::kNone;
}

LdltFactorization KktSolver::factorize(const AugmentedKkt& kkt) {
  ++count_;
  return LdltFactorization(kkt.matrix());
}

CorrectionResult KktSolver::inertia_correct(AugmentedKkt& kkt, double mu) {
  CorrectionResult res;
  const int start = count_;
  const Inertia target = kkt.target();
  auto add_action = [&](const char* a) {
    if (!res.actions.empty()) {
      res.actions += ",";
    }
    res.actions += a;
  };
  auto finish = [&](LdltFactorization fact) {
    res.inertia_ok = fact.inertia() == target;
    res.factorization = std::move(fact);
    res.delta_w = kkt.delta_w;
    res.delta_c = kkt.delta_c;
    res.factorizations = count_ - start;
    return res;
  };

  kkt.delta_w = 0.0;
  kkt.delta_c = settings_.delta_c_fixed;
  LdltFactorization fact = factorize(kkt);
  if (fact.inertia() == target) {
    return finish(std::move(fact));
  }

  int modified = 0;
  if (settings_.q_reg == QRegularization::kCritical) {
    modified = q_regularize_critical(kkt, settings_.critical_factor);
  } else if (settings_.q_reg == QRegularization::kEigenClip) {
    modified = q_regularize_eig(kkt, settings_.min_eig);
  }
  if (modified > 0) {
    add_action("q");
    fact = factorize(kkt);
    if (fact.inertia() == target) {
      return finish(std::move(fact));
    }
  }
  if (!settings_.inertia_correction) {
    return finish(std::move(fact));
  }

  if (fact.inertia().n_zero > 0) {
    kkt.delta_c = settings_.delta_c_fixed +
                  settings_.delta_c_base * std::pow(mu, settings_.delta_c_exp);
    add_action("c");
    fact = factorize(kkt);
    if (fact.inertia() == target) {
      return finish(std::move(fact));
    }
  }
  double dw = last_delta_w_ == 0.0
                  ? settings_.delta_w_init
                  : std::max(settings_.delta_w_min,
                             settings_.kappa_w_minus * last_delta_w_);
  add_action("w");
  while (true) {
    if (dw > settings_.delta_w_max) {
      throw Error(ErrorCode::kKktUnrecoverable,
                  "inertia correction exceeded delta_w_max");
    }
    kkt.delta_w = dw;
    fact = factorize(kkt);
    if (fact.inertia() == target) {
      last_delta_w_ = dw;
      return finish(std::move(fact));
    }
    if (fact.inertia().n_zero > 0 &&
        kkt.delta_c == settings_.delta_c_fixed) {
      kkt.delta_c = settings_.delta_c_fixed +
                    settings_.delta_c_base * std::pow(mu, settings_.delta_c_exp);
      add_action("c");
    }
    dw *= last_delta_w_ == 0.0 ? settings_.kappa_w_plus_first
                               : settings_.kappa_w_plus;
  }
}

Vec KktSolver::solve_step(const LdltFactorization& fact,
                          const AugmentedKkt& kkt, const Vec& r,
                          bool* degraded) const {
  Mat k = kkt.matrix();
  Vec rhs = -r;
  Vec d = fact.solve(rhs);
  const double tol = 1e-8 * (1.0 + (r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0));
  bool ok = false;
  for (int pass = 0; pass < 2; ++pass) {
    Vec res = rhs - k * d;
    d += fact.solve(res);
    double err = (rhs - k * d).size() ? (rhs - k * d).lpNorm<Eigen::Infinity>() : 0.0;
    if (err <= tol) {
      ok = true;
      break;
    }
  }
  if (degraded != nullptr) {
    *degraded = !ok;
  }
  return d;
}

Vec recover_bound_multiplier_steps(const Vec& w, const Vec& z, const Vec& dp,
                                   double mu) {
  Vec r = w.cwiseProduct(z).array() - mu;
  return -(r + z.cwiseProduct(dp)).cwiseQuotient(w);
}

}  // namespace mpcc

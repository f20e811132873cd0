#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mpcc/iterate.hpp"
#include "mpcc/model.hpp"

namespace mpcc {

struct Inertia {
  int n_pos = 0;
  int n_neg = 0;
  int n_zero = 0;

  bool operator==(const Inertia&) const = default;
};

/// Dense symmetric indefinite factorization P A Pᵀ = L D Lᵀ with
/// Bunch-Kaufman pivoting; D is block diagonal with 1x1 and 2x2 blocks.
class LdltFactorization {
 public:
  LdltFactorization() = default;
  explicit LdltFactorization(const Mat& a) { compute(a); }

  /// Reads the lower triangle of `a`.
  void compute(const Mat& a);
  Vec solve(const Vec& b) const;

  const Inertia& inertia() const { return inertia_; }
  bool success() const { return computed_ && inertia_.n_zero == 0; }
  int order() const { return static_cast<int>(perm_.size()); }

 private:
  Mat l_;
  // Block diagonal of D stored as (diag, subdiag); subdiag nonzero only in
  // the first row of a 2x2 block.
  Vec d_diag_;
  Vec d_sub_;
  std::vector<int> block_;
  std::vector<int> perm_;
  Inertia inertia_;
  bool computed_ = false;
};

Inertia eigen_inertia(const Mat& a, double tol = 0.0);

enum class KktShape { kRelaxation, kPenalty, kPlain };

/// Augmented system
///
///   [ W + D + Q + δ_w I   Jᵀ     ]
///   [ J                   -δ_c I ]
///
/// over primal variables (x0, x1, x2[, s]). D holds the diagonal barrier
/// terms Σ = Z/(P + δ) outside the complementarity pairs; each pair i
/// contributes the 2x2 block Q_i = [[q11, q12], [q12, q22]] at (x1_i, x2_i).
struct AugmentedKkt {
  KktShape shape = KktShape::kPlain;
  Layout layout;
  Mat hessian;
  Vec sigma;
  Vec q11, q22, q12;
  Mat jacobian;
  double delta_w = 0.0;
  double delta_c = 0.0;

  int n_primal() const { return static_cast<int>(sigma.size()); }
  int n_rows() const { return static_cast<int>(jacobian.rows()); }
  int order() const { return n_primal() + n_rows(); }
  Inertia target() const { return {n_primal(), n_rows(), 0}; }
  Mat matrix() const;
};

/// Builds the augmented system from Hessian/Jacobian data, the barrier
/// distances w = p + δ, bound multipliers z and per-pair coupling values.
AugmentedKkt assemble_kkt(KktShape shape, const Layout& layout,
                          const Mat& hessian, const Mat& jacobian,
                          const Vec& w, const Vec& z, const Vec& coupling);

/// Relaxation system: W = ∇²(f + y_cᵀc), coupling y_s, Scholtes rows
/// [0, X2, X1, I]. Throws kNonInterior if the iterate is not interior.
AugmentedKkt assemble_relaxation_kkt(const Iterate& it,
                                     const StandardProblem& problem,
                                     const Vec& delta = Vec());

/// Penalty system: coupling ρ on every pair, no slack rows.
AugmentedKkt assemble_penalty_kkt(const Iterate& it,
                                  const StandardProblem& problem, double rho,
                                  const Vec& delta = Vec());

/// Clamps |q12| to alpha * sqrt(q11 q22), preserving its sign. Returns the
/// number of modified blocks.
int q_regularize_critical(AugmentedKkt& kkt, double alpha);

/// Replaces each Q block by its eigen-decomposition with eigenvalues
/// clipped below at lambda_min. Returns the number of modified blocks.
int q_regularize_eig(AugmentedKkt& kkt, double lambda_min);

/// Closed-form clipped reconstruction of a symmetric 2x2 block.
void clip_block(double& a, double& b, double& c, double lambda_min);

enum class QRegularization { kCritical, kEigenClip, kNone };

QRegularization parse_q_regularization(const std::string& name);

struct KktSettings {
  QRegularization q_reg = QRegularization::kCritical;
  double critical_factor = 0.9999;
  double min_eig = 1e-8;
  bool inertia_correction = true;
  double delta_c_fixed = 0.0;
  double delta_w_init = 1e-4;
  double delta_w_min = 1e-20;
  double delta_w_max = 1e40;
  double kappa_w_minus = 1.0 / 3.0;
  double kappa_w_plus = 8.0;
  double kappa_w_plus_first = 100.0;
  double delta_c_base = 1e-8;
  double delta_c_exp = 0.25;
};

struct Direction {
  Vec dp;
  Vec dy;
  Vec dz;
  bool degraded = false;
};

struct CorrectionResult {
  LdltFactorization factorization;
  double delta_w = 0.0;
  double delta_c = 0.0;
  bool inertia_ok = false;
  int factorizations = 0;
  /// Comma-separated actions taken: "q" (Q-regularization), "w", "c".
  std::string actions;
};

/// Owns the per-solve factorization counter and the δ_w memory of the
/// staged inertia correction.
class KktSolver {
 public:
  explicit KktSolver(KktSettings settings = {}) : settings_(settings) {}

  LdltFactorization factorize(const AugmentedKkt& kkt);

  /// (0) factorize as given; (1) on wrong inertia apply the Q-regularization
  /// and refactorize; (2) grow δ_w (with δ_c when singular) until the
  /// inertia matches. Throws kKktUnrecoverable past δ_w_max. With correction
  /// disabled, returns after stage (1) with inertia_ok possibly false.
  CorrectionResult inertia_correct(AugmentedKkt& kkt, double mu);

  /// Solves K d = -r with iterative refinement.
  Vec solve_step(const LdltFactorization& fact, const AugmentedKkt& kkt,
                 const Vec& r, bool* degraded = nullptr) const;

  int factorization_count() const { return count_; }
  const KktSettings& settings() const { return settings_; }
  KktSettings& settings() { return settings_; }

 private:
  KktSettings settings_;
  int count_ = 0;
  double last_delta_w_ = 0.0;
};

/// Δz = -W⁻¹(r_comp + Z Δp) with W = diag(w), r_comp = W z - μ.
Vec recover_bound_multiplier_steps(const Vec& w, const Vec& z, const Vec& dp,
                                   double mu);

}  // namespace mpcc

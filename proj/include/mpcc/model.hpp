#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace mpcc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ErrorCode {
  kInvalidProblem = 1,
  kInconsistentBounds,
  kComplementarityInfeasible,
  kNonInterior,
  kKktUnrecoverable,
  kCapExceeded,
  kParse,
  kUnknownOption,
  kInvalidOptionValue,
  kEvaluation,
  kUnknownBuiltin,
  kBranchInfeasible,
};

/// Exception carrying an error code, an optional offending index and value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, int index = -1,
        double value = 0.0)
      : std::runtime_error(what), code_(code), index_(index), value_(value) {}

  ErrorCode code() const { return code_; }
  int index() const { return index_; }
  double value() const { return value_; }

 private:
  ErrorCode code_;
  int index_;
  double value_;
};

struct Triplet {
  int row;
  int col;
  double value;
};

/// MPCC in general bounded form:
///
///   min f(v)  s.t.  lg <= g(v) <= ug,  lx0 <= v0 <= ux0,
///                   lx1 <= v1 <= ux1,  lx2 <= v2 <= ux2,
///                   (v1 - lx1) ⊥ (v2 - lx2)
///
/// with v = (v0, v1, v2) of length n0 + 2 n_cc.
struct MpccProblem {
  int n0 = 0;
  int n_cc = 0;
  int m = 0;

  Vec lg, ug;
  Vec lx0, ux0;
  Vec lx1, lx2;
  Vec ux1, ux2;

  /// Optional starting point of length n(); empty means zero.
  Vec start;

  std::function<double(const Vec&)> objective;
  std::function<Vec(const Vec&)> gradient;
  std::function<Vec(const Vec&)> constraints;
  /// Coordinate-format Jacobian of g; duplicate entries are summed.
  std::function<std::vector<Triplet>(const Vec&)> jacobian;
  /// Lower triangle (row >= col) of ∇²f + Σ y_j ∇²g_j; duplicates summed.
  std::function<std::vector<Triplet>(const Vec&, const Vec&)> hessian;

  int n() const { return n0 + 2 * n_cc; }

  /// Fills empty bound vectors with their defaults and checks the invariants.
  void finalize();
  void validate() const;

  Mat dense_jacobian(const Vec& v) const;
  Mat dense_hessian(const Vec& v, const Vec& y) const;
};

/// Equality-plus-nonnegativity form min f(x) s.t. c(x) = 0, x >= 0 with
/// x = (x0, x1, x2) and 0 <= x1 ⊥ x2 >= 0. The original variables are the
/// affine image v = shift + map * x.
class StandardProblem {
 public:
  explicit StandardProblem(std::shared_ptr<const MpccProblem> original);

  int n0() const { return n0_; }
  int n_cc() const { return n_cc_; }
  int m() const { return static_cast<int>(rows_.size()); }
  int n() const { return n0_ + 2 * n_cc_; }

  double objective(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Vec constraints(const Vec& x) const;
  Mat jacobian(const Vec& x) const;
  /// Full symmetric ∇²f + Σ y_r ∇²c_r.
  Mat hessian(const Vec& x, const Vec& y) const;

  /// Original point v of a standard point x.
  Vec to_original(const Vec& x) const;
  /// Standard point whose slacks make every slack row exact. Free variables
  /// are split as (max(v, 0), max(-v, 0)).
  Vec from_original(const Vec& v) const;
  /// Standard starting point derived from the original problem's start.
  Vec start() const;

  /// Standard x0 indices that are inequality slacks.
  const std::vector<int>& slack_index() const { return slack_index_; }
  /// Lower-bound translation of each original variable (0 for free ones).
  const Vec& shift() const { return shift_; }
  const Mat& map() const { return map_; }
  const MpccProblem& original() const { return *original_; }

  /// Source row of g for each standard row, -1 for bound rows.
  std::vector<int> row_sources() const;

 private:
  struct Row {
    int source = -1;
    double sign = 1.0;
    double constant = 0.0;
    std::vector<std::pair<int, double>> linear;
  };

  Vec original_multipliers(const Vec& y) const;

  std::shared_ptr<const MpccProblem> original_;
  int n0_ = 0;
  int n_cc_ = 0;
  Mat map_;
  Vec shift_;
  std::vector<Row> rows_;
  std::vector<int> slack_index_;
  std::vector<int> free_plus_;
  std::vector<int> free_minus_;
  std::vector<int> free_source_;
};

StandardProblem to_standard_form(const MpccProblem& problem);
StandardProblem to_standard_form(std::shared_ptr<const MpccProblem> problem);

struct IndexSets {
  std::vector<int> i_plus0;
  std::vector<int> i_0plus;
  std::vector<int> i_00;
};

/// Partitions the pairs of (x1, x2). Indices are 0-based.
IndexSets index_sets(const Vec& x1, const Vec& x2, double tol);

struct MpccMultipliers {
  Vec y;
  Vec z0;
  Vec zeta1;
  Vec zeta2;
};

enum class Stationarity { kS, kM, kC, kA, kW, kNone };

std::string_view to_string(Stationarity label);

struct MpccResidual {
  /// ∇f + Jᵀy - (z0, ζ1, ζ2).
  Vec gradient;
  Vec constraints;
  /// x1 ∘ x2.
  Vec complementarity;
  /// x0 ∘ z0.
  Vec bound_complementarity;
};

MpccResidual mpcc_kkt_residual(const Vec& x, const MpccMultipliers& mult,
                               const StandardProblem& problem);

/// Strongest label of the taxonomy satisfied at x. W requires a vanishing
/// Lagrangian gradient, feasibility, z0 >= 0 with z0 ∘ x0 = 0, ζ1 = 0 on
/// I+0 and ζ2 = 0 on I0+.
Stationarity classify_stationarity(const Vec& x, const MpccMultipliers& mult,
                                   const IndexSets& sets,
                                   const StandardProblem& problem,
                                   double tol = 1e-6);

/// Biactive sign test alone, for points already known to be W-stationary.
Stationarity classify_biactive(const Vec& zeta1, const Vec& zeta2,
                               const std::vector<int>& i_00, double tol);

}  // namespace mpcc

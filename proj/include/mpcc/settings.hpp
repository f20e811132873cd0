#pragma once

#include "mpcc/linalg.hpp"
#include "mpcc/options.hpp"

namespace mpcc {

enum class MuRule { kMonotone, kLoqo, kQuality };
enum class TauRule { kRolloff, kProportional, kLoqo };

/// Typed view of an Options object for one algorithm.
struct Settings {
  Algorithm algorithm = Algorithm::kRelaxation;

  double tol = 1e-8;
  int max_iter = 3000;
  double mu_init = 0.1;
  double mu_min = 1e-11;
  MuRule mu_rule = MuRule::kMonotone;
  double kappa_mu = 0.2;
  double theta_mu = 1.5;
  double kappa_eps = 10.0;
  double loqo_gamma = 0.1;
  double loqo_r = 0.95;
  bool loqo_mpcc = true;
  double quality_lo = 1e-4;
  double quality_hi = 10.0;
  bool scaled_termination = false;
  double diverge_threshold = 1e12;
  KktSettings kkt;

  TauRule tau_rule = TauRule::kRolloff;
  bool endgame = true;
  double endgame_threshold = 1e-6;
  bool center = true;
  double centering_factor = 0.5;
  bool centering_slack_sqrt = false;
  double sigma_mu_ratio = 1.0;
  double sigma_mu_exp = 1.0;
  double sigma_min = 1e-8;
  double rolloff_slope = 2.0;
  double rolloff_point = 1e-6;
  double rolloff_max = 1.0;
  double gamma = 2.0;
  double r = 1e-8;
  double delta_max = 1e-4;
  double endgame_exp = 0.5;

  double rho0 = 1.0;
  double rho_max = 1e10;
  double rho_growth = 10.0;
  bool penalty_dynamic = false;
  int history_length = 10;
  double eta_pen = 0.99;

  double index_set_tol = 1e-6;
  double classification_tol = 1e-6;

  int enum_cap = 16;
  bool lpec_relaxed = false;
  double d_tol = 1e-10;
  double alpha_delta = 10.0;
  double alpha_growth = 10.0;
  double delta_proj_max = 1e2;
  int max_bnlp_tries = 5;
  double alpha_gamma = 0.1;
  double delta_verify = 1e-4;
  int crossover_max_iter = 100;

  static Settings from_options(const Options& options, Algorithm algorithm);
};

}  // namespace mpcc

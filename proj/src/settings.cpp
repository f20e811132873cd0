#include "mpcc/settings.hpp"

namespace mpcc {

Settings Settings::from_options(const Options& o, Algorithm a) {
  Settings s;
  s.algorithm = a;
  auto d = [&](const char* key) { return o.get_double(key, a); };
  auto i = [&](const char* key) { return o.get_int(key, a); };
  auto b = [&](const char* key) { return o.get_bool(key, a); };
  auto e = [&](const char* key) { return o.get_enum(key, a); };

  s.tol = d("tol");
  s.max_iter = i("max_iter");
  s.mu_init = d("barrier.mu_init");
  s.mu_min = d("barrier.mu_min");
  std::string rule = e("barrier");
  s.mu_rule = rule == "loqo"      ? MuRule::kLoqo
              : rule == "quality" ? MuRule::kQuality
                                  : MuRule::kMonotone;
  s.kappa_mu = d("barrier.kappa_mu");
  s.theta_mu = d("barrier.theta_mu");
  s.kappa_eps = d("barrier.kappa_eps");
  s.loqo_gamma = d("barrier.loqo_gamma");
  s.loqo_r = d("barrier.loqo_r");
  s.loqo_mpcc = e("barrier.loqo_mode") == "mpcc";
  s.quality_lo = d("quality_sigma_min");
  s.quality_hi = d("quality_sigma_max");
  s.scaled_termination = b("scaled_termination");
  s.diverge_threshold = d("diverge_threshold");

  s.kkt.q_reg = parse_q_regularization(e("q_regularization"));
  s.kkt.critical_factor = d("critical_rho_factor");
  s.kkt.min_eig = d("min_eig_value");
  s.kkt.inertia_correction = b("inertia_correction");
  s.kkt.delta_c_fixed = d("delta_c_fixed");

  std::string tau = e("relaxation_update");
  s.tau_rule = tau == "proportional" ? TauRule::kProportional
               : tau == "loqo"       ? TauRule::kLoqo
                                     : TauRule::kRolloff;
  s.endgame = e("endgame_strategy") == "relax_lb";
  s.endgame_threshold = d("endgame_threshold");
  s.center = b("center_complementarities");
  s.centering_factor = d("centering_factor");
  s.centering_slack_sqrt = e("centering_slack_mode") == "sqrt";
  s.sigma_mu_ratio = d("sigma_mu_ratio");
  s.sigma_mu_exp = d("sigma_mu_exp");
  s.sigma_min = d("sigma_min");
  s.rolloff_slope = d("rolloff_slope");
  s.rolloff_point = d("rolloff_point");
  s.rolloff_max = d("rolloff_max");
  s.gamma = d("gamma");
  s.r = d("r");
  s.delta_max = d("delta_max");
  s.endgame_exp = d("tau");

  s.rho0 = d("rho_0");
  s.rho_max = d("rho_max");
  s.rho_growth = d("rho_growth_rate");
  s.penalty_dynamic = e("penalty_update") == "dynamic";
  s.history_length = i("comp_history_length");
  s.eta_pen = d("eta_dynamic_update");

  s.index_set_tol = d("index_set_tol");
  s.classification_tol = d("classification_tol");

  s.enum_cap = i("crossover.enum_cap");
  s.lpec_relaxed = e("crossover.lpec_solver") == "relaxed";
  s.d_tol = d("crossover.d_tol");
  s.alpha_delta = d("crossover.alpha_delta");
  s.alpha_growth = d("crossover.alpha_growth");
  s.delta_proj_max = d("crossover.delta_max");
  s.max_bnlp_tries = i("crossover.max_bnlp_tries");
  s.alpha_gamma = d("crossover.alpha_gamma");
  s.delta_verify = d("crossover.delta_verify");
  s.crossover_max_iter = i("crossover.max_iter");
  return s;
}

}  // namespace mpcc

#include "mpcc/options.hpp"

#include <cctype>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "mpcc/model.hpp"

namespace mpcc {

namespace {

OptionInfo real(std::string name, std::string relax, std::string pen,
                std::string desc) {
  return {std::move(name), OptionKind::kDouble, std::move(relax),
          std::move(pen), {}, std::move(desc)};
}

OptionInfo real(std::string name, std::string def, std::string desc) {
  std::string copy = def;
  return real(std::move(name), std::move(def), std::move(copy),
              std::move(desc));
}

OptionInfo integer(std::string name, std::string def, std::string desc) {
  std::string copy = def;
  return {std::move(name), OptionKind::kInt, std::move(def), std::move(copy),
          {}, std::move(desc)};
}

OptionInfo flag(std::string name, std::string def, std::string desc) {
  std::string copy = def;
  return {std::move(name), OptionKind::kBool, std::move(def), std::move(copy),
          {}, std::move(desc)};
}

OptionInfo choice(std::string name, std::string def,
                  std::vector<std::string> choices, std::string desc) {
  std::string copy = def;
  return {std::move(name),    OptionKind::kEnum, std::move(def),
          std::move(copy),    std::move(choices), std::move(desc)};
}

std::vector<OptionInfo> build_table() {
  return {
      real("tol", "1e-8", "Stationarity tolerance."),
      integer("max_iter", "3000", "Iteration cap."),
      real("barrier.mu_init", "0.1", "Initial barrier parameter."),
      choice("barrier", "monotone", {"monotone", "loqo", "quality"},
             "Barrier update rule."),
      real("barrier.mu_min", "1e-11", "Barrier parameter floor."),
      real("barrier.kappa_mu", "0.2", "Monotone rule factor alpha_mu."),
      real("barrier.theta_mu", "1.5", "Monotone rule exponent beta_mu."),
      real("barrier.kappa_eps", "10",
           "Barrier problem solved when its error is below kappa_eps*mu."),
      real("barrier.loqo_gamma", "0.1", "LOQO barrier rule factor."),
      real("barrier.loqo_r", "0.95", "LOQO barrier rule step length parameter."),
      choice("barrier.loqo_mode", "mpcc", {"mpcc", "classic"},
             "Include upper-level complementarity in the LOQO barrier rule."),
      real("quality_sigma_min", "1e-4", "Lower end of the quality-function search."),
      real("quality_sigma_max", "10", "Upper end of the quality-function search."),
      flag("scaled_termination", "false",
           "Scale residuals by multiplier magnitudes before the tol test."),
      real("diverge_threshold", "1e12", "Iterate magnitude declared divergent."),
      flag("inertia_correction", "true",
           "Apply delta_w/delta_c corrections when inertia is wrong."),
      real("delta_c_fixed", "0",
           "Fixed dual regularization applied to every factorization."),
      choice("q_regularization", "critical_rho",
             {"critical_rho", "eigen_clip", "none"},
             "Q regularization scheme to use."),
      real("critical_rho_factor", "0.9999", "0.99",
           "Factor of critical multiplier (penalty) used."),
      real("min_eig_value", "1e-8",
           "Minimum eigenvalue of complementarity contribution in the Hessian."),
      choice("relaxation_update", "rolloff", {"rolloff", "proportional", "loqo"},
             "Update rule to use for tau."),
      choice("endgame_strategy", "relax_lb", {"relax_lb", "none"},
             "Endgame algorithm employed."),
      real("endgame_threshold", "1e-6",
           "KKT error threshold at which the endgame is triggered."),
      flag("center_complementarities", "true",
           "Center the complementarity variables at the start."),
      real("centering_factor", "0.5",
           "How far along the x1 = x2 line to place the centered start."),
      choice("centering_slack_mode", "feasible", {"feasible", "sqrt"},
             "Scholtes slack of the centered start."),
      real("mu_thresh", "5e-6", "Accepted for compatibility; has no effect."),
      real("sigma_mu_ratio", "1.0", "Proportional factor for tau."),
      real("sigma_mu_exp", "1.0", "Exponential factor for tau."),
      real("sigma_min", "1e-8", "Minimum value for tau."),
      real("rolloff_slope", "2.0", "Slope of tau(mu) as mu goes to 0."),
      real("rolloff_point", "1e-6", "Where tau starts to roll off."),
      real("rolloff_max", "1.0", "Maximum value for tau."),
      real("gamma", "2.0", "0.4",
           "LOQO tau rule factor (relaxation); dynamic update exponent "
           "(penalty)."),
      real("r", "1e-8", "LOQO tau rule step size."),
      real("delta_max", "1e-4", "Maximum allowed lower bound relaxation."),
      real("tau", "0.5", "Exponent applied to the residual in the endgame test."),
      real("rho_0", "1.0", "Initial penalty."),
      real("rho_max", "1e10", "Maximum penalty."),
      real("rho_growth_rate", "10", "Increase factor for the penalty."),
      choice("penalty_update", "static", {"static", "dynamic"},
             "Penalty update rule."),
      integer("comp_history_length", "10",
              "Length of history kept for complementarity values."),
      real("eta_dynamic_update", "0.99",
           "Sufficient decrease parameter for dynamic penalty updates."),
      real("index_set_tol", "1e-6", "Tolerance used to form index sets."),
      real("classification_tol", "1e-6", "Tolerance of the stationarity labels."),
      integer("crossover.enum_cap", "16",
              "Largest biactive set solved by enumeration."),
      choice("crossover.lpec_solver", "enumerate", {"enumerate", "relaxed"},
             "LPEC solver used by the active-set method."),
      real("crossover.d_tol", "1e-10", "Step norm regarded as zero."),
      real("crossover.alpha_delta", "10", "Initial radius factor."),
      real("crossover.alpha_growth", "10", "Radius growth of the projection."),
      real("crossover.delta_max", "1e2", "Largest projection radius."),
      integer("crossover.max_bnlp_tries", "5", "BNLP attempts per branch."),
      real("crossover.alpha_gamma", "0.1", "BNLP feasibility budget shrink."),
      real("crossover.delta_verify", "1e-4",
           "Initial trust radius of the active-set method."),
      integer("crossover.max_iter", "100", "Active-set iteration cap."),
  };
}

bool parse_double(std::string_view text, double& out) {
  std::string s(text);
  if (s == "inf" || s == "+inf" || s == "Inf") {
    out = kInf;
    return true;
  }
  if (s == "-inf" || s == "-Inf") {
    out = -kInf;
    return true;
  }
  auto* first = s.data();
  auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') {
    ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !std::isnan(out);
}

bool parse_bool(std::string_view text, bool& out) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") {
    out = true;
    return true;
  }
  if (text == "false" || text == "0" || text == "no" || text == "off") {
    out = false;
    return true;
  }
  return false;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

const OptionInfo& require(std::string_view key) {
  const OptionInfo* info = find_option(key);
  if (info == nullptr) {
    throw Error(ErrorCode::kUnknownOption,
                fmt::format("unknown option '{}'", key));
  }
  return *info;
}

}  // namespace

const std::vector<OptionInfo>& option_table() {
  static const std::vector<OptionInfo> table = build_table();
  return table;
}

const OptionInfo* find_option(std::string_view name) {
  for (const auto& info : option_table()) {
    if (info.name == name) {
      return &info;
    }
  }
  return nullptr;
}

void Options::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  const OptionInfo& info = require(key);
  bool ok = true;
  switch (info.kind) {
    case OptionKind::kDouble: {
      double d;
      ok = parse_double(value, d);
      break;
    }
    case OptionKind::kInt: {
      double d;
      ok = parse_double(value, d) && std::floor(d) == d;
      break;
    }
    case OptionKind::kBool: {
      bool b;
      ok = parse_bool(value, b);
      break;
    }
    case OptionKind::kEnum:
      ok = std::find(info.choices.begin(), info.choices.end(), value) !=
           info.choices.end();
      break;
  }
  if (!ok) {
    throw Error(ErrorCode::kInvalidOptionValue,
                fmt::format("invalid value '{}' for option '{}'", value, key));
  }
  values_[std::string(key)] = std::string(value);
}

void Options::set(std::string_view assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidOptionValue,
                fmt::format("expected key=value, got '{}'", assignment));
  }
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void Options::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kParse,
                fmt::format("cannot open option file '{}'", path));
  }
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (!view.empty()) {
      set(view);
    }
  }
}

bool Options::is_set(std::string_view key) const {
  return values_.find(std::string(key)) != values_.end();
}

std::string Options::raw(std::string_view key, Algorithm algorithm) const {
  const OptionInfo& info = require(key);
  if (auto it = values_.find(std::string(key)); it != values_.end()) {
    return it->second;
  }
  return algorithm == Algorithm::kRelaxation ? info.default_relaxation
                                             : info.default_penalty;
}

double Options::get_double(std::string_view key, Algorithm algorithm) const {
  double d = 0.0;
  parse_double(raw(key, algorithm), d);
  return d;
}

int Options::get_int(std::string_view key, Algorithm algorithm) const {
  return static_cast<int>(get_double(key, algorithm));
}

bool Options::get_bool(std::string_view key, Algorithm algorithm) const {
  bool b = false;
  parse_bool(raw(key, algorithm), b);
  return b;
}

std::string Options::get_enum(std::string_view key, Algorithm algorithm) const {
  return raw(key, algorithm);
}

std::string_view to_string(Algorithm algorithm) {
  return algorithm == Algorithm::kRelaxation ? "relaxation" : "penalty";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "relaxation") {
    return Algorithm::kRelaxation;
  }
  if (name == "penalty") {
    return Algorithm::kPenalty;
  }
  throw Error(ErrorCode::kInvalidOptionValue,
              fmt::format("unknown algorithm '{}'", name));
}

}  // namespace mpcc

#include "mpcc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <Eigen/QR>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "mpcc/penalty.hpp"
#include "mpcc/relax.hpp"

namespace mpcc {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kParse, fmt::format("field '{}': {}", field, what));
}

double read_number(const json& j, const std::string& field) {
  if (j.is_null()) {
    schema_error(field, "null is only allowed for bounds");
  }
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") {
      return kInf;
    }
    if (s == "-inf") {
      return -kInf;
    }
    schema_error(field, "expected a number, got \"" + s + "\"");
  }
  if (!j.is_number()) {
    schema_error(field, "expected a number");
  }
  return j.get<double>();
}

Vec read_vector(const json& j, const std::string& field, int size,
                double null_value = std::numeric_limits<double>::quiet_NaN()) {
  if (!j.is_array()) {
    schema_error(field, "expected an array");
  }
  if (size >= 0 && static_cast<int>(j.size()) != size) {
    schema_error(field, fmt::format("expected {} entries, got {}", size, j.size()));
  }
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    std::string f = fmt::format("{}[{}]", field, i);
    if (j[i].is_null() && !std::isnan(null_value)) {
      v[i] = null_value;
    } else {
      v[i] = read_number(j[i], f);
    }
  }
  return v;
}

Mat read_matrix(const json& j, const std::string& field, int rows, int cols) {
  Mat m = Mat::Zero(rows, cols);
  if (j.is_array()) {
    if (static_cast<int>(j.size()) != rows) {
      schema_error(field, fmt::format("expected {} rows, got {}", rows, j.size()));
    }
    for (int r = 0; r < rows; ++r) {
      m.row(r) = read_vector(j[r], fmt::format("{}[{}]", field, r), cols);
    }
    return m;
  }
  if (!j.is_object()) {
    schema_error(field, "expected a dense array or a coordinate object");
  }
  for (const char* key : {"rows", "cols", "values"}) {
    if (!j.contains(key)) {
      schema_error(field, fmt::format("coordinate form needs '{}'", key));
    }
  }
  Vec vals = read_vector(j["values"], field + ".values", -1);
  const int nnz = static_cast<int>(vals.size());
  Vec ri = read_vector(j["rows"], field + ".rows", nnz);
  Vec ci = read_vector(j["cols"], field + ".cols", nnz);
  for (int k = 0; k < nnz; ++k) {
    int r = static_cast<int>(ri[k]);
    int c = static_cast<int>(ci[k]);
    if (r != ri[k] || r < 0 || r >= rows) {
      schema_error(fmt::format("{}.rows[{}]", field, k), "index out of range");
    }
    if (c != ci[k] || c < 0 || c >= cols) {
      schema_error(fmt::format("{}.cols[{}]", field, k), "index out of range");
    }
    m(r, c) += vals[k];
  }
  return m;
}

json write_number(double v) {
  if (v == kInf) {
    return "inf";
  }
  if (v == -kInf) {
    return "-inf";
  }
  return v;
}

json write_vector(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) {
    a.push_back(write_number(v[i]));
  }
  return a;
}

json write_matrix(const Mat& m) {
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    a.push_back(write_vector(m.row(r).transpose()));
  }
  return a;
}

}  // namespace

bool QpccData::operator==(const QpccData& o) const {
  return n == o.n && Q == o.Q && q == o.q && constant == o.constant &&
         A == o.A && lg == o.lg && ug == o.ug && lb == o.lb && ub == o.ub &&
         pairs == o.pairs && start == o.start;
}

void validate(const QpccData& d) {
  if (d.n < 0 || d.Q.rows() != d.n || d.Q.cols() != d.n || d.q.size() != d.n) {
    throw Error(ErrorCode::kInvalidProblem, "objective shape mismatch");
  }
  for (int i = 0; i < d.n; ++i) {
    for (int j = 0; j < i; ++j) {
      if (d.Q(i, j) != d.Q(j, i)) {
        throw Error(ErrorCode::kInvalidProblem,
                    fmt::format("Q is not symmetric at ({}, {})", i, j), i);
      }
    }
  }
  const int m = static_cast<int>(d.A.rows());
  if ((m > 0 && d.A.cols() != d.n) || d.lg.size() != m || d.ug.size() != m) {
    throw Error(ErrorCode::kInvalidProblem, "constraint shape mismatch");
  }
  if (d.lb.size() != d.n || d.ub.size() != d.n) {
    throw Error(ErrorCode::kInvalidProblem, "bound shape mismatch");
  }
  if (d.start.size() != 0 && d.start.size() != d.n) {
    throw Error(ErrorCode::kInvalidProblem, "start shape mismatch");
  }
  std::vector<int> used(d.n, 0);
  for (size_t k = 0; k < d.pairs.size(); ++k) {
    auto [i, j] = d.pairs[k];
    if (i < 0 || i >= d.n || j < 0 || j >= d.n || i == j) {
      throw Error(ErrorCode::kInvalidProblem,
                  fmt::format("pair {} has invalid indices ({}, {})", k, i, j),
                  static_cast<int>(k));
    }
    if (++used[i] > 1 || ++used[j] > 1) {
      throw Error(ErrorCode::kInvalidProblem,
                  fmt::format("pair {} reuses a variable", k),
                  static_cast<int>(k));
    }
    if (!std::isfinite(d.lb[i]) || !std::isfinite(d.lb[j])) {
      throw Error(ErrorCode::kInvalidProblem,
                  fmt::format("pair {} needs finite lower bounds", k),
                  static_cast<int>(k));
    }
  }
}

QpccData parse_qpcc(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse,
                fmt::format("syntax error at byte {}: {}", e.byte, e.what()));
  }
  if (!j.is_object()) {
    schema_error("<root>", "expected an object");
  }
  if (!j.contains("version")) {
    schema_error("version", "missing");
  }
  if (read_number(j["version"], "version") != 1.0) {
    schema_error("version", "unsupported version");
  }
  if (!j.contains("n")) {
    schema_error("n", "missing");
  }
  double nd = read_number(j["n"], "n");
  if (nd < 0 || nd != std::floor(nd)) {
    schema_error("n", "expected a nonnegative integer");
  }
  QpccData d;
  d.n = static_cast<int>(nd);
  d.Q = Mat::Zero(d.n, d.n);
  d.q = Vec::Zero(d.n);
  if (j.contains("objective")) {
    const json& o = j["objective"];
    if (!o.is_object()) {
      schema_error("objective", "expected an object");
    }
    if (o.contains("Q")) {
      d.Q = read_matrix(o["Q"], "objective.Q", d.n, d.n);
    }
    if (o.contains("q")) {
      d.q = read_vector(o["q"], "objective.q", d.n);
    }
    if (o.contains("constant")) {
      d.constant = read_number(o["constant"], "objective.constant");
    }
  }
  int m = 0;
  if (j.contains("constraints")) {
    const json& c = j["constraints"];
    if (!c.is_object() || !c.contains("A")) {
      schema_error("constraints", "expected an object with 'A'");
    }
    if (c["A"].is_array()) {
      m = static_cast<int>(c["A"].size());
    } else if (c.contains("m")) {
      m = static_cast<int>(read_number(c["m"], "constraints.m"));
    } else {
      schema_error("constraints.m", "required with coordinate 'A'");
    }
    d.A = read_matrix(c["A"], "constraints.A", m, d.n);
    d.lg = c.contains("lower") ? read_vector(c["lower"], "constraints.lower", m, -kInf)
                               : Vec::Constant(m, -kInf);
    d.ug = c.contains("upper") ? read_vector(c["upper"], "constraints.upper", m, kInf)
                               : Vec::Constant(m, kInf);
  } else {
    d.A = Mat::Zero(0, d.n);
    d.lg = Vec();
    d.ug = Vec();
  }
  d.lb = Vec::Constant(d.n, -kInf);
  d.ub = Vec::Constant(d.n, kInf);
  if (j.contains("bounds")) {
    const json& b = j["bounds"];
    if (!b.is_object()) {
      schema_error("bounds", "expected an object");
    }
    if (b.contains("lower")) {
      d.lb = read_vector(b["lower"], "bounds.lower", d.n, -kInf);
    }
    if (b.contains("upper")) {
      d.ub = read_vector(b["upper"], "bounds.upper", d.n, kInf);
    }
  }
  if (j.contains("pairs")) {
    const json& p = j["pairs"];
    if (!p.is_array()) {
      schema_error("pairs", "expected an array");
    }
    for (size_t k = 0; k < p.size(); ++k) {
      std::string f = fmt::format("pairs[{}]", k);
      if (!p[k].is_array() || p[k].size() != 2) {
        schema_error(f, "expected [i, j]");
      }
      int idx[2];
      for (int t = 0; t < 2; ++t) {
        std::string ft = fmt::format("{}[{}]", f, t);
        double v = read_number(p[k][t], ft);
        if (v != std::floor(v) || v < 0 || v >= d.n) {
          schema_error(ft, fmt::format("index {} out of range [0, {})", v, d.n));
        }
        idx[t] = static_cast<int>(v);
      }
      d.pairs.emplace_back(idx[0], idx[1]);
    }
  }
  if (j.contains("start")) {
    d.start = read_vector(j["start"], "start", d.n);
  }
  validate(d);
  return d;
}

QpccData read_qpcc(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kParse, "cannot open problem file " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_qpcc(ss.str());
}

std::string serialize(const QpccData& d) {
  json j;
  j["version"] = 1;
  j["n"] = d.n;
  j["objective"] = {{"Q", write_matrix(d.Q)},
                    {"q", write_vector(d.q)},
                    {"constant", d.constant}};
  if (d.A.rows() > 0) {
    j["constraints"] = {{"A", write_matrix(d.A)},
                        {"lower", write_vector(d.lg)},
                        {"upper", write_vector(d.ug)}};
  }
  j["bounds"] = {{"lower", write_vector(d.lb)}, {"upper", write_vector(d.ub)}};
  json pairs = json::array();
  for (auto [a, b] : d.pairs) {
    pairs.push_back({a, b});
  }
  j["pairs"] = pairs;
  if (d.start.size()) {
    j["start"] = write_vector(d.start);
  }
  return j.dump(2);
}

MpccProblem to_mpcc(const QpccData& d, std::vector<int>* order_out) {
  validate(d);
  const int ncc = static_cast<int>(d.pairs.size());
  std::vector<int> in_pair(d.n, 0);
  for (auto [a, b] : d.pairs) {
    in_pair[a] = in_pair[b] = 1;
  }
  std::vector<int> order;
  for (int i = 0; i < d.n; ++i) {
    if (!in_pair[i]) {
      order.push_back(i);
    }
  }
  const int n0 = static_cast<int>(order.size());
  for (auto [a, b] : d.pairs) {
    order.push_back(a);
  }
  for (auto [a, b] : d.pairs) {
    order.push_back(b);
  }
  const int n = d.n;
  const int m = static_cast<int>(d.A.rows());
  auto perm_vec = [&](const Vec& v) {
    Vec out(n);
    for (int k = 0; k < n; ++k) {
      out[k] = v[order[k]];
    }
    return out;
  };
  Mat Q(n, n);
  Mat A(m, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      Q(r, c) = d.Q(order[r], order[c]);
    }
  }
  for (int c = 0; c < n; ++c) {
    A.col(c) = d.A.col(order[c]);
  }
  Vec q = perm_vec(d.q);
  Vec lb = perm_vec(d.lb);
  Vec ub = perm_vec(d.ub);

  MpccProblem p;
  p.n0 = n0;
  p.n_cc = ncc;
  p.m = m;
  p.lg = d.lg;
  p.ug = d.ug;
  p.lx0 = lb.head(n0);
  p.ux0 = ub.head(n0);
  p.lx1 = lb.segment(n0, ncc);
  p.ux1 = ub.segment(n0, ncc);
  p.lx2 = lb.segment(n0 + ncc, ncc);
  p.ux2 = ub.segment(n0 + ncc, ncc);
  if (d.start.size()) {
    p.start = perm_vec(d.start);
  }
  const double c0 = d.constant;
  p.objective = [Q, q, c0](const Vec& v) {
    return 0.5 * v.dot(Q * v) + q.dot(v) + c0;
  };
  p.gradient = [Q, q](const Vec& v) -> Vec { return Q * v + q; };
  p.constraints = [A](const Vec& v) -> Vec { return A * v; };
  std::vector<Triplet> jac;
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < n; ++c) {
      if (A(r, c) != 0.0) {
        jac.push_back({r, c, A(r, c)});
      }
    }
  }
  p.jacobian = [jac](const Vec&) { return jac; };
  std::vector<Triplet> hess;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c <= r; ++c) {
      if (Q(r, c) != 0.0) {
        hess.push_back({r, c, Q(r, c)});
      }
    }
  }
  p.hessian = [hess](const Vec&, const Vec&) { return hess; };
  p.finalize();
  if (order_out != nullptr) {
    *order_out = order;
  }
  return p;
}

MpccProblem load_problem(const std::string& path) {
  return to_mpcc(read_qpcc(path));
}

Vec to_file_order(const Vec& v, const std::vector<int>& order) {
  if (order.empty()) {
    return v;
  }
  Vec out(v.size());
  for (size_t k = 0; k < order.size(); ++k) {
    out[order[k]] = v[static_cast<int>(k)];
  }
  return out;
}

namespace {

QpccData box_qpcc(int n, Mat Q, Vec q, double c) {
  QpccData d;
  d.n = n;
  d.Q = std::move(Q);
  d.q = std::move(q);
  d.constant = c;
  d.A = Mat::Zero(0, n);
  d.lb = Vec::Zero(n);
  d.ub = Vec::Constant(n, kInf);
  return d;
}

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) {
    out[i++] = x;
  }
  return out;
}

struct Entry {
  std::string description;
  QpccData data;
  double optimum;
  bool convex;
  std::vector<LabeledPoint> points;
};

Entry make_entry(const std::string& name) {
  Mat two = 2.0 * Mat::Identity(2, 2);
  Mat zero = Mat::Zero(2, 2);
  Mat swap(2, 2);
  swap << 0.0, 1.0, 1.0, 0.0;
  if (name == "trivial-corner") {
    QpccData d = box_qpcc(2, zero, vec({1, 1}), 0.0);
    d.pairs = {{0, 1}};
    return {"min x1 + x2", d, 0.0, true,
            {{"origin", vec({0, 0}), Stationarity::kS}}};
  }
  if (name == "two-circle") {
    QpccData d = box_qpcc(2, two, vec({-2, -2}), 2.0);
    d.pairs = {{0, 1}};
    d.start = vec({0.6, 0.4});
    return {"min (x1-1)^2 + (x2-1)^2", d, 1.0, true,
            {{"(1,0)", vec({1, 0}), Stationarity::kS},
             {"(0,1)", vec({0, 1}), Stationarity::kS}}};
  }
  if (name == "bilinear-lpcc") {
    QpccData d = box_qpcc(2, zero, vec({-1, -1}), 0.0);
    d.ub = vec({1, 1});
    d.pairs = {{0, 1}};
    d.start = vec({0.6, 0.4});
    return {"min -x1 - x2 s.t. x1 <= 1, x2 <= 1", d, -1.0, true,
            {{"(1,0)", vec({1, 0}), Stationarity::kS},
             {"(0,1)", vec({0, 1}), Stationarity::kS}}};
  }
  if (name == "biactive-origin") {
    QpccData d = box_qpcc(2, two, vec({0, 0}), 0.0);
    d.pairs = {{0, 1}};
    return {"min x1^2 + x2^2", d, 0.0, true,
            {{"origin", vec({0, 0}), Stationarity::kS}}};
  }
  if (name == "w-not-s") {
    QpccData d = box_qpcc(2, swap, vec({-1, -1}), 1.0);
    d.ub = vec({1, 1});
    d.pairs = {{0, 1}};
    d.start = vec({0.6, 0.4});
    return {"min (x1-1)(x2-1) s.t. x1 <= 1, x2 <= 1", d, 0.0, false,
            {{"origin", vec({0, 0}), Stationarity::kC},
             {"(1,0)", vec({1, 0}), Stationarity::kS}}};
  }
  if (name == "tilted-switch") {
    QpccData d = box_qpcc(2, two, vec({-4, -2}), 5.0);
    d.pairs = {{0, 1}};
    return {"min (x1-2)^2 + (x2-1)^2", d, 1.0, true,
            {{"(2,0)", vec({2, 0}), Stationarity::kS},
             {"(0,1)", vec({0, 1}), Stationarity::kS}}};
  }
  if (name == "degenerate-jacobian") {
    QpccData d = box_qpcc(3, 2.0 * Mat::Identity(3, 3), vec({-2, -2, -2}), 3.0);
    d.A.resize(2, 3);
    d.A << 1, 1, 0, 1, 1, 0;
    d.lg = vec({1, 1});
    d.ug = vec({1, 1});
    d.pairs = {{1, 2}};
    return {"min |x - e|^2 s.t. x0 + x1 = 1 (stated twice)", d, 1.0, true,
            {{"(1,0,1)", vec({1, 0, 1}), Stationarity::kS}}};
  }
  if (name == "nonconvex-penalty") {
    QpccData d = box_qpcc(2, -swap, vec({1, 1}), 0.0);
    d.ub = vec({10, 10});
    d.pairs = {{0, 1}};
    return {"min -x1 x2 + x1 + x2 on [0,10]^2", d, 0.0, false,
            {{"origin", vec({0, 0}), Stationarity::kS}}};
  }
  throw Error(ErrorCode::kUnknownBuiltin, "unknown builtin '" + name + "'");
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {
      "trivial-corner", "two-circle",    "bilinear-lpcc",       "biactive-origin",
      "w-not-s",        "tilted-switch", "degenerate-jacobian", "nonconvex-penalty"};
  return names;
}

BuiltinInfo builtin_info(const std::string& name) {
  Entry e = make_entry(name);
  BuiltinInfo info;
  info.name = name;
  info.description = e.description;
  info.problem = to_mpcc(e.data);
  info.optimum = e.optimum;
  info.convex = e.convex;
  info.points = e.points;
  StandardProblem sp = to_standard_form(info.problem);
  BruteForceResult bf = brute_force_qpcc(sp);
  if (!bf.feasible || std::abs(bf.objective - e.optimum) > 1e-9) {
    throw Error(ErrorCode::kInvalidProblem,
                fmt::format("builtin '{}' registry optimum {} disagrees with "
                            "brute force {}",
                            name, e.optimum, bf.objective));
  }
  return info;
}

MpccProblem builtin(const std::string& name) {
  return builtin_info(name).problem;
}

BruteForceResult brute_force_qpcc(const StandardProblem& sp, double tol) {
  const int n = sp.n();
  const int m = sp.m();
  if (n > 20) {
    throw Error(ErrorCode::kCapExceeded, "brute force limited to 20 variables");
  }
  const Vec zero = Vec::Zero(n);
  const Vec g = sp.gradient(zero);
  const Mat h = sp.hessian(zero, Vec::Zero(m));
  const Vec c0 = sp.constraints(zero);
  const Mat a = sp.jacobian(zero);
  BruteForceResult best;
  const unsigned long total = 1ul << n;
  for (unsigned long mask = 0; mask < total; ++mask) {
    bool ok = true;
    for (int i = 0; i < sp.n_cc() && ok; ++i) {
      int a1 = sp.n0() + i;
      int a2 = sp.n0() + sp.n_cc() + i;
      ok = ((mask >> a1) & 1u) || ((mask >> a2) & 1u);
    }
    if (!ok) {
      continue;
    }
    std::vector<int> free;
    for (int i = 0; i < n; ++i) {
      if (!((mask >> i) & 1u)) {
        free.push_back(i);
      }
    }
    const int nf = static_cast<int>(free.size());
    Mat k = Mat::Zero(nf + m, nf + m);
    Vec rhs(nf + m);
    for (int r = 0; r < nf; ++r) {
      for (int c = 0; c < nf; ++c) {
        k(r, c) = h(free[r], free[c]);
      }
      for (int j = 0; j < m; ++j) {
        k(r, nf + j) = a(j, free[r]);
        k(nf + j, r) = a(j, free[r]);
      }
      rhs[r] = -g[free[r]];
    }
    rhs.tail(m) = -c0;
    Vec sol = nf + m > 0 ? Vec(k.completeOrthogonalDecomposition().solve(rhs))
                         : Vec();
    if (!sol.allFinite() ||
        (k * sol - rhs).lpNorm<Eigen::Infinity>() >
            1e-9 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) {
      continue;
    }
    Vec x = Vec::Zero(n);
    for (int r = 0; r < nf; ++r) {
      if (sol[r] < -tol) {
        ok = false;
        break;
      }
      x[free[r]] = std::max(sol[r], 0.0);
    }
    if (!ok) {
      continue;
    }
    Vec c = sp.constraints(x);
    if (c.size() && c.lpNorm<Eigen::Infinity>() > 1e-7) {
      continue;
    }
    double f = sp.objective(x);
    if (f < best.objective) {
      best.feasible = true;
      best.objective = f;
      best.x = x;
    }
  }
  return best;
}

MpccMultipliers estimate_multipliers(const StandardProblem& sp, const Vec& x,
                                     double tol) {
  const int n = sp.n();
  const int m = sp.m();
  const int n0 = sp.n0();
  const int ncc = sp.n_cc();
  std::vector<int> active;
  for (int i = 0; i < n; ++i) {
    if (x[i] <= tol) {
      active.push_back(i);
    }
  }
  const int na = static_cast<int>(active.size());
  Mat e = Mat::Zero(n, m + na);
  e.leftCols(m) = sp.jacobian(x).transpose();
  for (int k = 0; k < na; ++k) {
    e(active[k], m + k) = -1.0;
  }
  Vec sol = m + na > 0
                ? Vec(e.completeOrthogonalDecomposition().solve(-sp.gradient(x)))
                : Vec();
  MpccMultipliers mult;
  mult.y = sol.head(m);
  Vec z = Vec::Zero(n);
  for (int k = 0; k < na; ++k) {
    z[active[k]] = sol[m + k];
  }
  mult.z0 = z.head(n0);
  mult.zeta1 = z.segment(n0, ncc);
  mult.zeta2 = z.segment(n0 + ncc, ncc);
  return mult;
}

std::vector<BenchRecord> run_bench(const std::vector<std::string>& solvers,
                                   const std::vector<BenchProblem>& problems,
                                   const Options& options,
                                   const BenchConfig& config) {
  const size_t cells = solvers.size() * problems.size();
  std::vector<BenchRecord> records(cells);
  std::atomic<size_t> next{0};
  auto work = [&]() {
    while (true) {
      size_t idx = next.fetch_add(1);
      if (idx >= cells) {
        return;
      }
      const std::string& solver = solvers[idx / problems.size()];
      const BenchProblem& bp = problems[idx % problems.size()];
      BenchRecord rec;
      rec.solver = solver;
      rec.problem = bp.name;
      auto t0 = std::chrono::steady_clock::now();
      try {
        Algorithm alg = parse_algorithm(solver);
        StandardProblem sp = to_standard_form(bp.problem);
        SolveResult r = alg == Algorithm::kPenalty ? solve_penalty(sp, options)
                                                   : solve_relaxation(sp, options);
        rec.status = r.status;
        rec.objective = r.objective;
        rec.iterations = r.iterations;
        rec.factorizations = r.factorizations;
        rec.kkt = r.report.overall;
        rec.complementarity = r.report.complementarity_upper;
      } catch (const std::exception&) {
        rec.status = Status::kFailure;
      }
      rec.wall_time = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      if (rec.wall_time > config.timeout) {
        rec.status = Status::kFailure;
      }
      records[idx] = rec;
    }
  };
  const int workers = std::max(1, std::min<int>(config.workers, static_cast<int>(cells)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) {
      pool.emplace_back(work);
    }
    for (auto& t : pool) {
      t.join();
    }
  }
  return records;
}

double Profile::at(int solver, double theta) const {
  double value = 0.0;
  for (size_t k = 0; k < thetas.size(); ++k) {
    if (thetas[k] <= theta) {
      value = fraction[solver][k];
    }
  }
  return value;
}

Profile performance_profile(const std::vector<BenchRecord>& records,
                            ProfileMetric metric) {
  Profile prof;
  std::vector<std::string> problems;
  for (const auto& r : records) {
    if (std::find(prof.solvers.begin(), prof.solvers.end(), r.solver) ==
        prof.solvers.end()) {
      prof.solvers.push_back(r.solver);
    }
    if (std::find(problems.begin(), problems.end(), r.problem) == problems.end()) {
      problems.push_back(r.problem);
    }
  }
  const int ns = static_cast<int>(prof.solvers.size());
  std::map<std::pair<std::string, std::string>, double> value;
  for (const auto& r : records) {
    double v = kInf;
    if (r.status == Status::kSuccess) {
      v = metric == ProfileMetric::kIterations
              ? std::max(1.0, static_cast<double>(r.iterations))
              : std::max(r.wall_time, 1e-9);
    }
    value[{r.solver, r.problem}] = v;
  }
  std::vector<std::vector<double>> ratios(ns);
  std::vector<double> breaks = {1.0};
  int counted = 0;
  for (const auto& p : problems) {
    double best = kInf;
    for (const auto& s : prof.solvers) {
      auto it = value.find({s, p});
      if (it != value.end()) {
        best = std::min(best, it->second);
      }
    }
    if (!std::isfinite(best)) {
      prof.excluded.push_back(p);
      continue;
    }
    ++counted;
    for (int s = 0; s < ns; ++s) {
      auto it = value.find({prof.solvers[s], p});
      double r = it == value.end() ? kInf : it->second / best;
      ratios[s].push_back(r);
      if (std::isfinite(r)) {
        breaks.push_back(r);
      }
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  prof.thetas = breaks;
  prof.fraction.assign(ns, std::vector<double>(breaks.size(), 0.0));
  for (int s = 0; s < ns; ++s) {
    for (size_t k = 0; k < breaks.size(); ++k) {
      int hit = 0;
      for (double r : ratios[s]) {
        if (r <= breaks[k]) {
          ++hit;
        }
      }
      prof.fraction[s][k] = counted ? static_cast<double>(hit) / counted : 0.0;
    }
  }
  return prof;
}

void write_records_csv(std::ostream& out,
                       const std::vector<BenchRecord>& records) {
  out << "solver,problem,status,objective,wall_time,iterations,factorizations,"
         "kkt,complementarity\n";
  for (const auto& r : records) {
    out << fmt::format("{},{},{},{:.17g},{:.6g},{},{},{:.6e},{:.6e}\n",
                       r.solver, r.problem, to_string(r.status), r.objective,
                       r.wall_time, r.iterations, r.factorizations, r.kkt,
                       r.complementarity);
  }
}

void write_profile_csv(std::ostream& out, const Profile& profile) {
  out << "theta";
  for (const auto& s : profile.solvers) {
    out << "," << s;
  }
  out << "\n";
  for (size_t k = 0; k < profile.thetas.size(); ++k) {
    out << fmt::format("{:.6g}", profile.thetas[k]);
    for (size_t s = 0; s < profile.solvers.size(); ++s) {
      out << fmt::format(",{:.6g}", profile.fraction[s][k]);
    }
    out << "\n";
  }
}

void write_log_csv(std::ostream& out, const std::vector<IterationRecord>& log) {
  out << "iter,mu,tau,rho,f,theta,kkt,comp,alpha_pr,alpha_du,factorizations,"
         "delta_w,delta_c,reg\n";
  for (const auto& r : log) {
    out << fmt::format(
        "{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},"
        "{:.17g},{},{:.17g},{:.17g},\"{}\"\n",
        r.iter, r.mu, r.tau, r.rho, r.f, r.theta, r.kkt, r.comp, r.alpha_pr,
        r.alpha_du, r.factorizations, r.delta_w, r.delta_c, r.reg);
  }
}

}  // namespace mpcc

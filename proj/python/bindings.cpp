#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mpcc/bench.hpp"
#include "mpcc/run.hpp"

namespace py = pybind11;
using namespace mpcc;

namespace {

RunConfig config_from(const std::string& algorithm, bool crossover, const py::dict& options) {
  RunConfig cfg;
  cfg.set("algorithm", algorithm);
  cfg.crossover = crossover;
  for (const auto& [k, v] : options) {
    std::string value = py::isinstance<py::bool_>(v) ? (v.cast<bool>() ? "true" : "false")
                                                     : py::str(v).cast<std::string>();
    cfg.set(py::str(k).cast<std::string>(), value);
  }
  return cfg;
}

py::dict summary(const RunResult& r, const std::vector<int>& order) {
  py::dict d;
  d["status"] = std::string(to_string(r.status));
  d["objective"] = r.objective;
  d["x"] = to_file_order(r.x, order);
  d["kkt"] = r.report.overall;
  d["stationarity"] = r.report.stationarity;
  d["constraint_violation"] = r.report.constraint_violation;
  d["complementarity"] = r.complementarity;
  d["iterations"] = r.iterations;
  d["factorizations"] = r.factorizations;
  d["stationarity_label"] = std::string(to_string(r.solve.stationarity));
  d["message"] = r.solve.message;
  if (r.crossover) {
    d["crossover_status"] = std::string(to_string(r.crossover->status));
    d["b_stationary"] = r.crossover->active_set.b_stationary;
  }
  return d;
}

py::dict solve_data(const QpccData& data, const std::string& algorithm, bool crossover,
                    const py::dict& options) {
  std::vector<int> order;
  MpccProblem p = to_mpcc(data, &order);
  RunConfig cfg = config_from(algorithm, crossover, options);
  RunResult r;
  {
    py::gil_scoped_release release;
    r = run_solver(p, cfg);
  }
  return summary(r, order);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Interior-point solvers for QPs with complementarity constraints";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("builtin_names", &builtin_names);

  m.def(
      "solve_builtin",
      [](const std::string& name, const std::string& algorithm, bool crossover,
         const py::dict& options) {
        MpccProblem p = builtin(name);
        RunConfig cfg = config_from(algorithm, crossover, options);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_solver(p, cfg);
        }
        return summary(r, {});
      },
      py::arg("name"), py::arg("algorithm") = "relaxation", py::arg("crossover") = false,
      py::arg("options") = py::dict());

  m.def(
      "solve_json",
      [](const std::string& text, const std::string& algorithm, bool crossover,
         const py::dict& options) {
        return solve_data(parse_qpcc(text), algorithm, crossover, options);
      },
      py::arg("text"), py::arg("algorithm") = "relaxation", py::arg("crossover") = false,
      py::arg("options") = py::dict());

  m.def(
      "solve_qpcc",
      [](const Mat& Q, const Vec& q, const std::vector<std::pair<int, int>>& pairs,
         std::optional<Mat> A, std::optional<Vec> lg, std::optional<Vec> ug,
         std::optional<Vec> lb, std::optional<Vec> ub, double constant,
         std::optional<Vec> start, const std::string& algorithm, bool crossover,
         const py::dict& options) {
        QpccData d;
        d.n = static_cast<int>(q.size());
        d.Q = Q;
        d.q = q;
        d.constant = constant;
        d.A = A ? *A : Mat::Zero(0, d.n);
        const int rows = static_cast<int>(d.A.rows());
        d.lg = lg ? *lg : Vec::Constant(rows, -kInf);
        d.ug = ug ? *ug : Vec::Constant(rows, kInf);
        d.lb = lb ? *lb : Vec::Zero(d.n);
        d.ub = ub ? *ub : Vec::Constant(d.n, kInf);
        d.pairs = pairs;
        if (start) d.start = *start;
        validate(d);
        return solve_data(d, algorithm, crossover, options);
      },
      py::arg("Q"), py::arg("q"), py::arg("pairs") = std::vector<std::pair<int, int>>{},
      py::arg("A") = py::none(), py::arg("lg") = py::none(), py::arg("ug") = py::none(),
      py::arg("lb") = py::none(), py::arg("ub") = py::none(), py::arg("constant") = 0.0,
      py::arg("start") = py::none(), py::arg("algorithm") = "relaxation",
      py::arg("crossover") = false, py::arg("options") = py::dict());
}

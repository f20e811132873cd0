#include "mpcc/c_api.h"

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "mpcc/bench.hpp"
#include "mpcc/run.hpp"

namespace {

using namespace mpcc;

struct State {
  MpccProblem problem;
  std::vector<int> order;
  RunConfig config;
  std::optional<RunResult> result;
};

std::mutex registry_mutex;
std::map<mpcc_handle, std::shared_ptr<State>> registry;
mpcc_handle next_handle = 1;

thread_local std::string last_error;

int fail(int code, std::string message) {
  last_error = std::move(message);
  return code;
}

int ok() {
  last_error.clear();
  return MPCC_OK;
}

std::shared_ptr<State> lookup(mpcc_handle h) {
  std::lock_guard<std::mutex> lock(registry_mutex);
  auto it = registry.find(h);
  return it == registry.end() ? nullptr : it->second;
}

int add(std::shared_ptr<State> state, mpcc_handle* out) {
  std::lock_guard<std::mutex> lock(registry_mutex);
  *out = next_handle++;
  registry.emplace(*out, std::move(state));
  return ok();
}

// Runs `body`, mapping exceptions to codes.
template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    return fail(static_cast<int>(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail(MPCC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MPCC_ERR_INTERNAL, "unknown exception");
  }
}

int invalid_handle(mpcc_handle h) {
  return fail(MPCC_ERR_INVALID_HANDLE,
              "handle " + std::to_string(h) + " is not a live problem");
}

template <class F>
int with_result(mpcc_handle h, F&& read) {
  auto state = lookup(h);
  if (!state) {
    return invalid_handle(h);
  }
  if (!state->result) {
    return fail(MPCC_ERR_NO_RESULT, "no solve has run on this handle");
  }
  return guarded([&] {
    read(*state->result);
    return ok();
  });
}

Vec copy(const double* p, int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) {
    v[i] = p[i];
  }
  return v;
}

}  // namespace

extern "C" {

int mpcc_problem_create(int n, const double* Q, const double* q,
                        double constant, int m, const double* A,
                        const double* lg, const double* ug, const double* lb,
                        const double* ub, int n_pairs, const int* first,
                        const int* second, const double* start,
                        mpcc_handle* out) {
  if (!out) {
    return fail(MPCC_ERR_NULL_ARGUMENT, "output handle pointer is null");
  }
  if (n < 0 || m < 0 || n_pairs < 0) {
    return fail(MPCC_ERR_INVALID_PROBLEM, "negative dimension");
  }
  if ((n > 0 && (!Q || !q)) || (m > 0 && n > 0 && !A) ||
      (m > 0 && (!lg || !ug)) || (n_pairs > 0 && (!first || !second))) {
    return fail(MPCC_ERR_NULL_ARGUMENT, "required array is null");
  }
  return guarded([&] {
    QpccData d;
    d.n = n;
    d.Q = Mat::Zero(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        d.Q(r, c) = Q[r * n + c];
      }
    }
    d.q = n ? copy(q, n) : Vec();
    d.constant = constant;
    d.A = Mat::Zero(m, n);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < n; ++c) {
        d.A(r, c) = A[r * n + c];
      }
    }
    d.lg = m ? copy(lg, m) : Vec();
    d.ug = m ? copy(ug, m) : Vec();
    d.lb = lb ? copy(lb, n) : Vec(Vec::Zero(n));
    d.ub = ub ? copy(ub, n) : Vec(Vec::Constant(n, kInf));
    for (int k = 0; k < n_pairs; ++k) {
      d.pairs.emplace_back(first[k], second[k]);
    }
    if (start) {
      d.start = copy(start, n);
    }
    validate(d);
    auto state = std::make_shared<State>();
    state->problem = to_mpcc(d, &state->order);
    return add(std::move(state), out);
  });
}

int mpcc_problem_from_json(const char* text, mpcc_handle* out) {
  if (!text || !out) {
    return fail(MPCC_ERR_NULL_ARGUMENT, "null argument");
  }
  return guarded([&] {
    auto state = std::make_shared<State>();
    state->problem = to_mpcc(parse_qpcc(text), &state->order);
    return add(std::move(state), out);
  });
}

int mpcc_problem_builtin(const char* name, mpcc_handle* out) {
  if (!name || !out) {
    return fail(MPCC_ERR_NULL_ARGUMENT, "null argument");
  }
  return guarded([&] {
    auto state = std::make_shared<State>();
    state->problem = builtin(name);
    return add(std::move(state), out);
  });
}

int mpcc_problem_destroy(mpcc_handle handle) {
  std::lock_guard<std::mutex> lock(registry_mutex);
  if (registry.erase(handle) == 0) {
    last_error = "handle " + std::to_string(handle) + " is not a live problem";
    return MPCC_ERR_INVALID_HANDLE;
  }
  last_error.clear();
  return MPCC_OK;
}

int mpcc_set_option(mpcc_handle handle, const char* key, const char* value) {
  if (!key || !value) {
    return fail(MPCC_ERR_NULL_ARGUMENT, "null option key or value");
  }
  auto state = lookup(handle);
  if (!state) {
    return invalid_handle(handle);
  }
  return guarded([&] {
    state->config.set(key, value);
    return ok();
  });
}

int mpcc_solve(mpcc_handle handle) {
  auto state = lookup(handle);
  if (!state) {
    return invalid_handle(handle);
  }
  return guarded([&] {
    state->result = run_solver(state->problem, state->config);
    return ok();
  });
}

int mpcc_result_status(mpcc_handle handle, int* status) {
  if (!status) return fail(MPCC_ERR_NULL_ARGUMENT, "null output");
  return with_result(handle, [&](const RunResult& r) {
    *status = static_cast<int>(r.status);
  });
}

int mpcc_result_objective(mpcc_handle handle, double* value) {
  if (!value) return fail(MPCC_ERR_NULL_ARGUMENT, "null output");
  return with_result(handle, [&](const RunResult& r) { *value = r.objective; });
}

int mpcc_result_kkt(mpcc_handle handle, double* value) {
  if (!value) return fail(MPCC_ERR_NULL_ARGUMENT, "null output");
  return with_result(handle,
                     [&](const RunResult& r) { *value = r.report.overall; });
}

int mpcc_result_stationarity(mpcc_handle handle, double* value) {
  if (!value) return fail(MPCC_ERR_NULL_ARGUMENT, "null output");
  return with_result(handle,
                     [&](const RunResult& r) { *value = r.report.stationarity; });
}

int mpcc_result_constraint_violation(mpcc_handle handle, double* value) {
  if (!value) return fail(MPCC_ERR_NULL_ARGUMENT, "null output");
  return with_result(handle, [&](const RunResult& r) {
    *value = r.report.constraint_violation;
  });
}

int mpcc_result_complementarity(mpcc_handle handle, double* value) {
  if (!value) return fail(MPCC_ERR_NULL_ARGUMENT, "null output");
  return with_result(handle,
                     [&](const RunResult& r) { *value = r.complementarity; });
}

int mpcc_result_iterations(mpcc_handle handle, int* value) {
  if (!value) return fail(MPCC_ERR_NULL_ARGUMENT, "null output");
  return with_result(handle, [&](const RunResult& r) { *value = r.iterations; });
}

int mpcc_result_factorizations(mpcc_handle handle, int* value) {
  if (!value) return fail(MPCC_ERR_NULL_ARGUMENT, "null output");
  return with_result(handle,
                     [&](const RunResult& r) { *value = r.factorizations; });
}

int mpcc_result_x(mpcc_handle handle, double* buffer, int len) {
  if (!buffer) return fail(MPCC_ERR_NULL_ARGUMENT, "null output");
  auto state = lookup(handle);
  if (!state) {
    return invalid_handle(handle);
  }
  if (!state->result) {
    return fail(MPCC_ERR_NO_RESULT, "no solve has run on this handle");
  }
  const Vec x = to_file_order(state->result->x, state->order);
  if (len < x.size()) {
    return fail(MPCC_ERR_BUFFER_TOO_SMALL,
                "buffer holds " + std::to_string(len) + " values, need " +
                    std::to_string(x.size()));
  }
  std::memcpy(buffer, x.data(), sizeof(double) * x.size());
  return ok();
}

int mpcc_problem_size(mpcc_handle handle, int* n) {
  if (!n) return fail(MPCC_ERR_NULL_ARGUMENT, "null output");
  auto state = lookup(handle);
  if (!state) {
    return invalid_handle(handle);
  }
  *n = state->problem.n();
  return ok();
}

const char* mpcc_last_error(void) { return last_error.c_str(); }

}  // extern "C"

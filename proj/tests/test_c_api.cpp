#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "mpcc/c_api.h"
#include "mpcc/run.hpp"
#include "support.hpp"

using namespace mpcc;

namespace {

mpcc_handle two_circle_arrays() {
  double Q[] = {2, 0, 0, 2};
  double q[] = {-2, -2};
  int first[] = {0};
  int second[] = {1};
  mpcc_handle h = 0;
  REQUIRE(mpcc_problem_create(2, Q, q, 2.0, 0, nullptr, nullptr, nullptr, nullptr,
                              nullptr, 1, first, second, nullptr, &h) == MPCC_OK);
  return h;
}

}  // namespace

TEST_CASE("C API solves two-circle from arrays") {
  mpcc_handle h = two_circle_arrays();
  CHECK(h != 0);
  int n = 0;
  CHECK(mpcc_problem_size(h, &n) == MPCC_OK);
  CHECK(n == 2);
  REQUIRE(mpcc_solve(h) == MPCC_OK);
  int status = -1;
  CHECK(mpcc_result_status(h, &status) == MPCC_OK);
  CHECK(status == MPCC_STATUS_SUCCESS);
  double f = 0, comp = 1;
  CHECK(mpcc_result_objective(h, &f) == MPCC_OK);
  CHECK(f == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(mpcc_result_complementarity(h, &comp) == MPCC_OK);
  CHECK(comp <= 1e-8);
  int iters = 0, facts = 0;
  CHECK(mpcc_result_iterations(h, &iters) == MPCC_OK);
  CHECK(mpcc_result_factorizations(h, &facts) == MPCC_OK);
  CHECK(iters > 0);
  CHECK(facts >= iters);

  double small[1];
  CHECK(mpcc_result_x(h, small, 1) == MPCC_ERR_BUFFER_TOO_SMALL);
  CHECK(std::string(mpcc_last_error()).size() > 0);
  double x[2];
  CHECK(mpcc_result_x(h, x, 2) == MPCC_OK);
  CHECK(std::string(mpcc_last_error()).empty());
  CHECK(std::min(x[0], x[1]) <= 1e-4);

  CHECK(mpcc_problem_destroy(h) == MPCC_OK);
  CHECK(mpcc_solve(h) == MPCC_ERR_INVALID_HANDLE);
  CHECK(mpcc_problem_destroy(h) == MPCC_ERR_INVALID_HANDLE);
  CHECK(mpcc_result_objective(0, &f) == MPCC_ERR_INVALID_HANDLE);
}

TEST_CASE("C API error codes") {
  mpcc_handle h = two_circle_arrays();
  double f = 0;
  CHECK(mpcc_result_objective(h, &f) == MPCC_ERR_NO_RESULT);
  CHECK(mpcc_set_option(h, "no_such_option", "1") == MPCC_ERR_UNKNOWN_OPTION);
  CHECK(mpcc_set_option(h, "tol", "abc") == MPCC_ERR_INVALID_OPTION_VALUE);
  CHECK(mpcc_set_option(h, nullptr, "1") == MPCC_ERR_NULL_ARGUMENT);
  CHECK(mpcc_result_objective(h, nullptr) == MPCC_ERR_NULL_ARGUMENT);
  mpcc_problem_destroy(h);

  double Q[] = {1, 2, 0, 1};
  double q[] = {0, 0};
  mpcc_handle bad = 0;
  CHECK(mpcc_problem_create(2, Q, q, 0.0, 0, nullptr, nullptr, nullptr, nullptr, nullptr, 0,
                            nullptr, nullptr, nullptr, &bad) == MPCC_ERR_INVALID_PROBLEM);
  CHECK(bad == 0);
  CHECK(std::string(mpcc_last_error()).size() > 0);

  CHECK(mpcc_problem_builtin("no-such", &bad) == MPCC_ERR_UNKNOWN_BUILTIN);
  CHECK(mpcc_problem_from_json("{oops", &bad) == MPCC_ERR_PARSE);
}

TEST_CASE("C API without pairs and with rows") {
  // min ½‖v‖² − 2 v0 s.t. v0 + v1 = 1, v >= 0: v = (1, 0).
  double Q[] = {1, 0, 0, 1};
  double q[] = {-2, 0};
  double A[] = {1, 1};
  double lg[] = {1}, ug[] = {1};
  mpcc_handle h = 0;
  REQUIRE(mpcc_problem_create(2, Q, q, 0.0, 1, A, lg, ug, nullptr, nullptr, 0, nullptr,
                              nullptr, nullptr, &h) == MPCC_OK);
  REQUIRE(mpcc_solve(h) == MPCC_OK);
  int status = -1;
  mpcc_result_status(h, &status);
  CHECK(status == MPCC_STATUS_SUCCESS);
  double x[2];
  mpcc_result_x(h, x, 2);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(x[1]) <= 1e-6);
  mpcc_problem_destroy(h);
}

TEST_CASE("C API options reach the solver") {
  mpcc_handle a = two_circle_arrays();
  mpcc_handle b = two_circle_arrays();
  CHECK(mpcc_set_option(b, "tol", "1e-3") == MPCC_OK);
  mpcc_solve(a);
  mpcc_solve(b);
  int ia = 0, ib = 0;
  mpcc_result_iterations(a, &ia);
  mpcc_result_iterations(b, &ib);
  CHECK(ib < ia);
  double kkt = 1;
  mpcc_result_kkt(b, &kkt);
  CHECK(kkt <= 1e-3);

  CHECK(mpcc_set_option(a, "algorithm", "penalty") == MPCC_OK);
  CHECK(mpcc_set_option(a, "crossover", "true") == MPCC_OK);
  mpcc_solve(a);
  double comp = 1;
  mpcc_result_complementarity(a, &comp);
  CHECK(comp == 0.0);
  mpcc_problem_destroy(a);
  mpcc_problem_destroy(b);
}

TEST_CASE("C API matches the library driver") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    mpcc_handle h = 0;
    REQUIRE(mpcc_problem_builtin(name.c_str(), &h) == MPCC_OK);
    mpcc_set_option(h, "algorithm", "penalty");
    mpcc_solve(h);
    RunConfig cfg;
    cfg.set("algorithm", "penalty");
    RunResult r = run_solver(builtin(name), cfg);
    double f = 0;
    int iters = 0;
    mpcc_result_objective(h, &f);
    mpcc_result_iterations(h, &iters);
    CHECK(f == r.objective);
    CHECK(iters == r.iterations);
    int n = 0;
    mpcc_problem_size(h, &n);
    std::vector<double> x(n);
    mpcc_result_x(h, x.data(), n);
    for (int i = 0; i < n; ++i) CHECK(x[i] == r.x[i]);
    mpcc_problem_destroy(h);
  }
}

TEST_CASE("C API reports x in the caller's variable order") {
  // min ½‖v − (0, 5, 3)‖², v2 ⊥ v0, v1 unpaired: v = (0, 5, 3).
  double Q[] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  double q[] = {0, -5, -3};
  int first[] = {2};
  int second[] = {0};
  mpcc_handle h = 0;
  REQUIRE(mpcc_problem_create(3, Q, q, 0.0, 0, nullptr, nullptr, nullptr, nullptr, nullptr, 1,
                              first, second, nullptr, &h) == MPCC_OK);
  REQUIRE(mpcc_solve(h) == MPCC_OK);
  double x[3];
  REQUIRE(mpcc_result_x(h, x, 3) == MPCC_OK);
  CHECK(std::abs(x[0]) <= 1e-6);
  CHECK(x[1] == doctest::Approx(5.0).epsilon(1e-8));
  CHECK(x[2] == doctest::Approx(3.0).epsilon(1e-8));
  mpcc_problem_destroy(h);
}

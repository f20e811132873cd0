#ifndef MPCC_C_API_H
#define MPCC_C_API_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Return codes. Positive values below 100 mirror the library error codes. */
#define MPCC_OK 0
#define MPCC_ERR_INVALID_PROBLEM 1
#define MPCC_ERR_INCONSISTENT_BOUNDS 2
#define MPCC_ERR_COMPLEMENTARITY_INFEASIBLE 3
#define MPCC_ERR_NON_INTERIOR 4
#define MPCC_ERR_KKT_UNRECOVERABLE 5
#define MPCC_ERR_CAP_EXCEEDED 6
#define MPCC_ERR_PARSE 7
#define MPCC_ERR_UNKNOWN_OPTION 8
#define MPCC_ERR_INVALID_OPTION_VALUE 9
#define MPCC_ERR_EVALUATION 10
#define MPCC_ERR_UNKNOWN_BUILTIN 11
#define MPCC_ERR_BRANCH_INFEASIBLE 12
#define MPCC_ERR_INVALID_HANDLE 100
#define MPCC_ERR_NO_RESULT 101
#define MPCC_ERR_BUFFER_TOO_SMALL 102
#define MPCC_ERR_NULL_ARGUMENT 103
#define MPCC_ERR_INTERNAL 199

/* Solve status values reported by mpcc_result_status. */
#define MPCC_STATUS_SUCCESS 0
#define MPCC_STATUS_MAX_ITER 1
#define MPCC_STATUS_RESTORATION_FAILED 2
#define MPCC_STATUS_DIVERGED 3
#define MPCC_STATUS_PENALTY_SATURATED 4
#define MPCC_STATUS_STALLED 5
#define MPCC_STATUS_FAILURE 6

/* Handles are never reused; a released handle stays invalid. 0 is never a
   valid handle. */
typedef uint64_t mpcc_handle;

/*
 * QPCC from dense row-major arrays:
 *   min 1/2 v'Qv + q'v + constant  s.t.  lg <= A v <= ug,  lb <= v <= ub,
 *   v[first[k]] complementary to v[second[k]].
 * Q is n*n, A is m*n. Bounds may be +-HUGE_VAL. lb/ub may be NULL (0 and
 * +inf). start may be NULL. Every array is copied.
 */
int mpcc_problem_create(int n, const double* Q, const double* q,
                        double constant, int m, const double* A,
                        const double* lg, const double* ug, const double* lb,
                        const double* ub, int n_pairs, const int* first,
                        const int* second, const double* start,
                        mpcc_handle* out);

/* Problem from the JSON schema accepted by the CLI. */
int mpcc_problem_from_json(const char* text, mpcc_handle* out);
int mpcc_problem_builtin(const char* name, mpcc_handle* out);

int mpcc_problem_destroy(mpcc_handle handle);

/* Same keys and values as the CLI --set flag. The key "algorithm" selects
   relaxation or penalty and "crossover" (true/false) chains the crossover. */
int mpcc_set_option(mpcc_handle handle, const char* key, const char* value);

/* Runs the solve. A solver failure is not an error: it returns MPCC_OK and
   the status is reported by mpcc_result_status. */
int mpcc_solve(mpcc_handle handle);

int mpcc_result_status(mpcc_handle handle, int* status);
int mpcc_result_objective(mpcc_handle handle, double* value);
/* Overall, stationarity, constraint and complementarity residuals. */
int mpcc_result_kkt(mpcc_handle handle, double* value);
int mpcc_result_stationarity(mpcc_handle handle, double* value);
int mpcc_result_constraint_violation(mpcc_handle handle, double* value);
int mpcc_result_complementarity(mpcc_handle handle, double* value);
int mpcc_result_iterations(mpcc_handle handle, int* value);
int mpcc_result_factorizations(mpcc_handle handle, int* value);
/* Writes the n original variables; fails when len < n. */
int mpcc_result_x(mpcc_handle handle, double* buffer, int len);
int mpcc_problem_size(mpcc_handle handle, int* n);

/* Message of the last failed call on this thread; empty after success. */
const char* mpcc_last_error(void);

#ifdef __cplusplus
}
#endif

#endif

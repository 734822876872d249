#ifndef EOT_EOT_H
#define EOT_EOT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(EOT_BUILDING_LIBRARY)
#    define EOT_API __declspec(dllexport)
#  else
#    define EOT_API __declspec(dllimport)
#  endif
#else
#  define EOT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum eot_status {
  EOT_OK = 0,
  EOT_ERR_EMPTY_SUPPORT = 1,
  EOT_ERR_NONPOSITIVE_WEIGHT = 2,
  EOT_ERR_WEIGHT_SUM = 3,
  EOT_ERR_DIMENSION_MISMATCH = 4,
  EOT_ERR_NEGATIVE_COST = 5,
  EOT_ERR_ASSUMPTION_VIOLATED = 6,
  EOT_ERR_ALL_TERMS_VANISH = 7,
  EOT_ERR_OVERFLOW = 8,
  EOT_ERR_NOT_A_TRANSFORM_PAIR = 9,
  EOT_ERR_NEGATIVE_DUAL_VALUE = 10,
  EOT_ERR_MAX_ITERS = 11,
  EOT_ERR_TOO_LARGE = 12,
  EOT_ERR_EMPTY_BALL = 13,
  EOT_ERR_INVALID_ARGUMENT = 14,
  EOT_ERR_PARSE = 15,
  EOT_ERR_IO = 16,
  EOT_ERR_INTERNAL = 99
} eot_status;

typedef struct eot_instance eot_instance;
typedef struct eot_report eot_report;
typedef struct eot_study eot_study;

/* Message of the last failing call on this thread; "" if none. */
EOT_API const char* eot_last_error(void);
EOT_API const char* eot_status_string(eot_status status);
/* Nonzero for input-validation failures. */
EOT_API int eot_status_is_validation(eot_status status);

/* ---- instances ---- */

EOT_API eot_status eot_instance_from_json(const char* text, eot_instance** out);
EOT_API eot_status eot_instance_from_file(const char* path, eot_instance** out);
/* Two marginals on the real line: mu at 0..n-1, nu at 0..m-1, cost row-major n x m. */
EOT_API eot_status eot_instance_from_matrix(const double* mu, size_t n, const double* nu, size_t m,
                                            const double* cost, eot_instance** out);
/* Uniform n-point grids on [0, 1] with the step cost. */
EOT_API eot_status eot_instance_counterexample(size_t n, eot_instance** out);
EOT_API void eot_instance_free(eot_instance* inst);

EOT_API size_t eot_instance_num_marginals(const eot_instance* inst);
EOT_API size_t eot_instance_marginal_size(const eot_instance* inst, size_t i);
EOT_API size_t eot_instance_dimension(const eot_instance* inst, size_t i);
EOT_API double eot_instance_K(const eot_instance* inst);
/* Hex SHA-256 of the canonical instance bytes; owned by the instance. */
EOT_API const char* eot_instance_digest(const eot_instance* inst);
/* Flat cost tensor, last index fastest; owned by the instance. */
EOT_API const double* eot_instance_cost(const eot_instance* inst, size_t* len);

/* ---- solves ---- */

typedef struct eot_solve_options {
  double tol_potential;
  double tol_marginal;
  size_t max_iters;
  /* Optional strictly decreasing annealing epsilons; may be NULL. */
  const double* eps_schedule;
  size_t eps_schedule_len;
  unsigned threads;
} eot_solve_options;

EOT_API void eot_solve_options_default(eot_solve_options* opts);

/* On EOT_ERR_MAX_ITERS *out still receives the last iterate's report. */
EOT_API eot_status eot_solve(const eot_instance* inst, double epsilon, const eot_solve_options* opts,
                             eot_report** out);
EOT_API eot_status eot_mm_solve(const eot_instance* inst, double epsilon,
                                const eot_solve_options* opts, eot_report** out);
EOT_API void eot_report_free(eot_report* report);

EOT_API double eot_report_epsilon(const eot_report* r);
EOT_API double eot_report_dual(const eot_report* r);
EOT_API double eot_report_primal(const eot_report* r);
EOT_API double eot_report_gap(const eot_report* r);
EOT_API double eot_report_marginal_residual(const eot_report* r);
EOT_API double eot_report_K(const eot_report* r);
EOT_API size_t eot_report_iterations(const eot_report* r);
EOT_API size_t eot_report_total_iterations(const eot_report* r);
EOT_API int eot_report_converged(const eot_report* r);

EOT_API size_t eot_report_num_potentials(const eot_report* r);
EOT_API const double* eot_report_potential(const eot_report* r, size_t i, size_t* len);
/* Plan weights, same layout as the cost tensor. */
EOT_API const double* eot_report_plan(const eot_report* r, size_t* len);
EOT_API const size_t* eot_report_plan_shape(const eot_report* r, size_t* rank);

typedef struct eot_trace_row {
  size_t iter;
  double dual;
  double primal;
  double gap;
  double marginal_residual;
  double elapsed_ms;
} eot_trace_row;

EOT_API size_t eot_report_trace_length(const eot_report* r);
EOT_API eot_status eot_report_trace_row(const eot_report* r, size_t k, eot_trace_row* row);

/* ---- exact transport ---- */

/* Unregularized optimum. plan_out may be NULL, otherwise it needs room for
   every cost entry. Uses the multi-marginal LP for more than two marginals. */
EOT_API eot_status eot_exact_oracle(const eot_instance* inst, double* value, double* plan_out);

/* ---- limits ---- */

typedef struct eot_ctilde_options {
  size_t samples;
  double eta;
  uint64_t seed;
  double plateau_tol;
  /* Support cube [box_lo, box_hi]^dim of the uniform reference measure. */
  double box_lo;
  double box_hi;
  /* Optional strictly decreasing radii; NULL selects 0.25 * 2^-k, k = 0..12. */
  const double* radii;
  size_t radii_len;
} eot_ctilde_options;

EOT_API void eot_ctilde_options_default(eot_ctilde_options* opts);

/* Pointwise c~ of a named cost ("step-example", "abs-diff",
   "squared-distance", "power-distance") under the uniform product measure. */
EOT_API eot_status eot_ctilde_estimate(const char* cost_name, double exponent, size_t dim,
                                       const double* x, const double* y,
                                       const eot_ctilde_options* opts, double* value);
/* c~ of a two-marginal analytic-cost instance at every atom pair, n x m. */
EOT_API eot_status eot_ctilde_tabulate(const eot_instance* inst, const eot_ctilde_options* opts,
                                       double* out);
EOT_API uint64_t eot_derive_seed(uint64_t base, uint64_t a, uint64_t b);

typedef struct eot_study_row {
  double epsilon;
  double dual;
  double primal;
  double gap;
  double oracle_gap;
  double kantorovich_residual;
  size_t iterations;
  int converged;
} eot_study_row;

/* ctilde_cost (n x m, may be NULL) replaces the instance cost in the oracle. */
EOT_API eot_status eot_eps_study(const eot_instance* inst, const double* eps_list, size_t len,
                                 const eot_solve_options* opts, const double* ctilde_cost,
                                 eot_study** out);
EOT_API void eot_study_free(eot_study* study);
EOT_API size_t eot_study_length(const eot_study* s);
EOT_API eot_status eot_study_row_at(const eot_study* s, size_t k, eot_study_row* row);
EOT_API double eot_study_oracle_value(const eot_study* s);
EOT_API int eot_study_uses_ctilde(const eot_study* s);

/* Lower-case hex SHA-256 of a byte buffer; out needs 65 bytes. */
EOT_API eot_status eot_sha256_hex(const void* data, size_t len, char* out);

EOT_API eot_status eot_coulomb_lipschitz_bound(double M, double alpha, double epsilon, double K,
                                               double* L, double* transform_lipschitz);

#ifdef __cplusplus
}
#endif

#endif

#ifndef NCGL_NCGL_H
#define NCGL_NCGL_H

/* C interface to the verification library. Every function returns an
 * ncgl_status; on failure ncgl_last_error() describes the problem for the
 * calling thread. Handles are opaque and owned by the caller. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define NCGL_API __declspec(dllexport)
#else
#define NCGL_API __attribute__((visibility("default")))
#endif

typedef enum ncgl_status {
  NCGL_OK = 0,
  NCGL_ERR_STRUCTURAL = 1,
  NCGL_ERR_DOMAIN = 2,
  NCGL_ERR_NUMERICAL_RANK = 3,
  NCGL_ERR_INSTABILITY = 4,
  NCGL_ERR_CONFIG = 5,
  NCGL_ERR_IO = 6,
  NCGL_ERR_NULL_ARGUMENT = 7,
  NCGL_ERR_INTERNAL = 8
} ncgl_status;

typedef struct ncgl_config ncgl_config;
typedef struct ncgl_result ncgl_result;

/* One report row. String pointers stay valid until the result is destroyed. */
typedef struct ncgl_row {
  const char* suite;
  const char* instance;
  uint64_t seed;
  double lhs;
  double rhs;
  double constant;
  double margin;
  int pass;
  double ms;
  const char* flag;
  int defects_ok;
} ncgl_row;

NCGL_API const char* ncgl_version(void);
/* Message of the last failed call on this thread, "" if none. */
NCGL_API const char* ncgl_last_error(void);
NCGL_API const char* ncgl_status_name(ncgl_status s);

NCGL_API size_t ncgl_suite_count(void);
NCGL_API const char* ncgl_suite_name(size_t i);

NCGL_API ncgl_status ncgl_config_create(ncgl_config** out);
/* Parses a JSON experiment manifest. */
NCGL_API ncgl_status ncgl_config_from_json(const char* json, ncgl_config** out);
NCGL_API void ncgl_config_destroy(ncgl_config* c);

NCGL_API ncgl_status ncgl_config_set_suite(ncgl_config* c, const char* suite);
NCGL_API ncgl_status ncgl_config_set_trials(ncgl_config* c, int trials);
NCGL_API ncgl_status ncgl_config_set_seed(ncgl_config* c, uint64_t seed);
NCGL_API ncgl_status ncgl_config_set_p_grid(ncgl_config* c, const double* p, size_t n);
NCGL_API ncgl_status ncgl_config_set_dims(ncgl_config* c, const int64_t* dims, size_t n);
NCGL_API ncgl_status ncgl_config_set_B(ncgl_config* c, double B);
NCGL_API ncgl_status ncgl_config_set_beta(ncgl_config* c, double beta);
NCGL_API ncgl_status ncgl_config_set_budget(ncgl_config* c, int budget);
NCGL_API ncgl_status ncgl_config_set_timing(ncgl_config* c, int on);
NCGL_API ncgl_status ncgl_config_set_threads(ncgl_config* c, int threads);
/* Checks the configuration without running it. */
NCGL_API ncgl_status ncgl_config_validate(const ncgl_config* c);

NCGL_API ncgl_status ncgl_run(const ncgl_config* c, ncgl_result** out);
NCGL_API void ncgl_result_destroy(ncgl_result* r);

NCGL_API size_t ncgl_result_row_count(const ncgl_result* r);
NCGL_API ncgl_status ncgl_result_row(const ncgl_result* r, size_t i, ncgl_row* out);
NCGL_API size_t ncgl_result_failures(const ncgl_result* r);
NCGL_API double ncgl_result_min_margin(const ncgl_result* r);
NCGL_API int ncgl_result_defects_ok(const ncgl_result* r);
/* 0 iff all rows pass, 1 otherwise. */
NCGL_API int ncgl_result_exit_code(const ncgl_result* r);
NCGL_API size_t ncgl_result_constant_count(const ncgl_result* r);
NCGL_API const char* ncgl_result_constant(const ncgl_result* r, size_t i);

/* format is "csv" or "json". The string is freed with ncgl_string_free. */
NCGL_API ncgl_status ncgl_result_format(const ncgl_result* r, const char* format, char** out);
NCGL_API ncgl_status ncgl_result_write(const ncgl_result* r, const char* format, const char* path);
NCGL_API void ncgl_string_free(char* s);

/* Closed-form pieces. */
NCGL_API ncgl_status ncgl_main_constant(double p, double* out);
NCGL_API ncgl_status ncgl_moment_constant(double p, double B, double* c_pB, double* simplified);
NCGL_API ncgl_status ncgl_tangent_counterexample(int N, double p, double* tau_weak_y, double* tau_abs_x,
                                                 double* norm_ratio);

#ifdef __cplusplus
}
#endif

#endif

// Copyright 2026 The mfra Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MFRA_MFRA_H_
#define MFRA_MFRA_H_

/* C interface to the mfra solver library. Every call returns an mfra_status;
 * on failure mfra_last_error() holds a message for the calling thread.
 * Matrices cross the boundary row-major, one row per user. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(MFRA_BUILDING_LIBRARY)
#    define MFRA_API __declspec(dllexport)
#  else
#    define MFRA_API __declspec(dllimport)
#  endif
#elif defined(__GNUC__) && __GNUC__ >= 4
#  define MFRA_API __attribute__((visibility("default")))
#else
#  define MFRA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct mfra_instance mfra_instance;
typedef struct mfra_reference mfra_reference;
typedef struct mfra_run mfra_run;

typedef enum {
  MFRA_OK = 0,
  MFRA_ERR_INVALID_ARGUMENT = 1, /* null handle, bad enum value, short buffer */
  MFRA_ERR_SHAPE = 2,
  MFRA_ERR_DOMAIN = 3,
  MFRA_ERR_PARAMETER = 4,
  MFRA_ERR_BUILD = 5,
  MFRA_ERR_UNSUPPORTED = 6,
  MFRA_ERR_PARSE = 7,
  MFRA_ERR_IO = 8,
  MFRA_ERR_INTERNAL = 99
} mfra_status;

typedef enum {
  MFRA_ALG_DUAL = 0,
  MFRA_ALG_ADMM1 = 1, /* x-update first */
  MFRA_ALG_ADMM2 = 2, /* y-update first */
  MFRA_ALG_LINEARIZED = 3
} mfra_algorithm;

typedef enum {
  MFRA_AGG_REDUCE_BROADCAST = 0,
  MFRA_AGG_ALLREDUCE = 1
} mfra_aggregation;

typedef enum {
  MFRA_TERM_THRESHOLD = 0,
  MFRA_TERM_ITERATION_LIMIT = 1
} mfra_termination;

MFRA_API const char* mfra_version(void);
MFRA_API const char* mfra_last_error(void);
MFRA_API const char* mfra_status_name(int status);

/* Strings returned through char** are owned by the caller. */
MFRA_API void mfra_string_free(char* s);

/* ---- instances ---- */

MFRA_API int mfra_instance_load(const char* path, mfra_instance** out);
MFRA_API int mfra_instance_from_json(const char* text, mfra_instance** out);
MFRA_API int mfra_instance_save(const mfra_instance* inst, const char* path);
MFRA_API int mfra_instance_to_json(const mfra_instance* inst, char** out_text);

/* Random GLB instance; copies > 1 replicates the users and scales capacities. */
MFRA_API int mfra_instance_generate_glb(uint64_t seed, int64_t num_users,
                                        int64_t num_facilities,
                                        double capacity_ratio, double q,
                                        int64_t copies, mfra_instance** out);
MFRA_API int mfra_instance_from_glb_json(const char* text, mfra_instance** out);
MFRA_API int mfra_instance_from_te_json(const char* text, mfra_instance** out);

typedef struct {
  int64_t num_users;
  int64_t num_facilities;
  double total_demand;   /* sum of scaled-simplex totals */
  double total_capacity; /* sum of facility upper bounds */
  double mean_demand;    /* over simplex users; 0 if there are none */
} mfra_instance_summary;

MFRA_API int mfra_instance_get_summary(const mfra_instance* inst,
                                       mfra_instance_summary* out);
MFRA_API int mfra_instance_evaluate(const mfra_instance* inst, const double* x,
                                    size_t len, double* out_objective);
MFRA_API void mfra_instance_free(mfra_instance* inst);

/* ---- reference solutions ---- */

typedef struct {
  double p_star;
  int64_t iterations;
  double final_dk_over_n;
  double max_violation;
  int low_confidence;
} mfra_reference_summary;

/* threshold <= 0 or max_iters <= 0 selects the defaults (1e-14, 1e5). */
MFRA_API int mfra_reference_solve(const mfra_instance* inst, double rho,
                                  double threshold, int64_t max_iters,
                                  mfra_reference** out);
MFRA_API int mfra_reference_get_summary(const mfra_reference* ref,
                                        mfra_reference_summary* out);
MFRA_API void mfra_reference_free(mfra_reference* ref);

/* ---- runs ---- */

typedef struct {
  int algorithm;          /* mfra_algorithm */
  double rho;             /* penalty, or initial dual step for MFRA_ALG_DUAL */
  int64_t max_iters;
  double stop_threshold;  /* on D^k / N */
  int diminishing_step;   /* dual decomposition: rho / sqrt(k) when nonzero */
  double linearized_r;    /* must exceed rho * N for MFRA_ALG_LINEARIZED */
  int64_t threads;
  int aggregation;        /* mfra_aggregation */
  double fail_prob;
  uint64_t seed;
  int record_timing;      /* fill wall_ms; makes traces non-reproducible */
} mfra_solver_options;

MFRA_API void mfra_solver_options_default(mfra_solver_options* opts);

/* ref may be NULL; with a reference the trace carries V^k. */
MFRA_API int mfra_solve(const mfra_instance* inst,
                        const mfra_solver_options* opts,
                        const mfra_reference* ref, mfra_run** out);

typedef struct {
  int64_t iterations;
  int termination; /* mfra_termination */
  double final_objective;
  double final_dk;
  int has_primal_residual;
  double final_primal_residual;
  double final_coupling_residual;
  uint64_t comm_rounds;
  int64_t total_faults;
  int has_initial_vk;
  double initial_vk;
} mfra_run_summary;

typedef struct {
  int64_t iter;
  double objective;
  double dk;
  int has_vk;
  double vk;
  int has_primal_residual;
  double primal_residual;
  double coupling_residual;
  uint64_t comm_rounds;
  int has_wall_ms;
  double wall_ms;
} mfra_trace_row;

MFRA_API int mfra_run_get_summary(const mfra_run* run, mfra_run_summary* out);
MFRA_API int mfra_run_trace_length(const mfra_run* run, int64_t* out);
MFRA_API int mfra_run_trace_row(const mfra_run* run, int64_t index,
                                mfra_trace_row* out);
MFRA_API int mfra_run_write_csv(const mfra_run* run, const char* path);
MFRA_API int mfra_run_csv(const mfra_run* run, char** out_text);
/* len must be num_users * num_facilities. */
MFRA_API int mfra_run_final_x(const mfra_run* run, double* x, size_t len);
MFRA_API void mfra_run_free(mfra_run* run);

#ifdef __cplusplus
}
#endif

#endif /* MFRA_MFRA_H_ */

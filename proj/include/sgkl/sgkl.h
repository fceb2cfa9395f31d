/*
 * Copyright (c) 2026, SGKL developers.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SGKL_SGKL_H
#define SGKL_SGKL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(SGKL_BUILDING_LIBRARY)
#define SGKL_API __declspec(dllexport)
#else
#define SGKL_API __declspec(dllimport)
#endif
#else
#define SGKL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sgkl_status {
  SGKL_OK = 0,
  SGKL_ERR_INVALID = 1,
  SGKL_ERR_CONFIG = 2,
  SGKL_ERR_NUMERICAL = 3,
  SGKL_ERR_IO = 4,
  SGKL_ERR_INTERNAL = 5
} sgkl_status;

typedef struct sgkl_dataset sgkl_dataset;
typedef struct sgkl_model sgkl_model;
typedef struct sgkl_report sgkl_report;

/* Message for the last failing call on this thread; never NULL. */
SGKL_API const char* sgkl_last_error(void);
SGKL_API const char* sgkl_version(void);

/*
 * Configuration is JSON text with optional "learner" and "synthetic" objects.
 * NULL means all defaults. A non-NULL seed overrides both the learner seed
 * and the synthetic run seed.
 */
SGKL_API sgkl_status sgkl_config_validate(const char* config_json);

/* Datasets */
SGKL_API sgkl_status sgkl_dataset_generate(const char* config_json, const uint64_t* seed,
                                           sgkl_dataset** out);
SGKL_API sgkl_status sgkl_dataset_load_dir(const char* dir, sgkl_dataset** out);
SGKL_API sgkl_status sgkl_dataset_load_files(const char* graph_csv, const char* signals_csv,
                                             sgkl_dataset** out);
SGKL_API sgkl_status sgkl_dataset_save_dir(const sgkl_dataset* data, const char* dir);
SGKL_API sgkl_status sgkl_dataset_graph_count(const sgkl_dataset* data, size_t* count);
SGKL_API sgkl_status sgkl_dataset_shape(const sgkl_dataset* data, size_t graph, size_t* nodes,
                                        size_t* signals, double* observed_fraction);
/* Column-major nodes x signals; missing entries are NaN. */
SGKL_API sgkl_status sgkl_dataset_signals(const sgkl_dataset* data, size_t graph, double* out,
                                          size_t len);
SGKL_API sgkl_status sgkl_dataset_has_truth(const sgkl_dataset* data, size_t graph,
                                            int* has_truth);
SGKL_API void sgkl_dataset_free(sgkl_dataset* data);

/*
 * Fits kernels and coefficients on every graph of the dataset. `resume` may
 * be NULL. When the fit fails numerically and `dump_dir` is not NULL, a
 * diagnostic file is written there and its path is appended to the error.
 */
SGKL_API sgkl_status sgkl_fit(const sgkl_dataset* data, const char* config_json,
                              const uint64_t* seed, const sgkl_model* resume,
                              const char* dump_dir, sgkl_model** out);
SGKL_API sgkl_status sgkl_model_save(const sgkl_model* model, const char* dir);
/* Restores a checkpoint; the dataset must be the one it was fitted on. */
SGKL_API sgkl_status sgkl_model_load(const char* dir, const sgkl_dataset* data,
                                     sgkl_model** out);
SGKL_API sgkl_status sgkl_model_kernel_count(const sgkl_model* model, size_t* kernels);
/* mu and s must each hold kernel_count values. */
SGKL_API sgkl_status sgkl_model_psi(const sgkl_model* model, double* mu, double* s);
SGKL_API sgkl_status sgkl_model_summary(const sgkl_model* model, int* outer_iterations,
                                        int* converged, double* objective);
SGKL_API sgkl_status sgkl_model_trace_length(const sgkl_model* model, size_t* len);
SGKL_API sgkl_status sgkl_model_trace(const sgkl_model* model, double* objectives, size_t len);
SGKL_API sgkl_status sgkl_model_reconstruct(const sgkl_model* model, size_t graph, double* out,
                                            size_t len);
SGKL_API sgkl_status sgkl_model_reconstruct_csv(const sgkl_model* model, size_t graph,
                                                const char* path);
/* NMSE on missing entries against the dataset's stored clean signals. */
SGKL_API sgkl_status sgkl_model_nmse(const sgkl_model* model, const sgkl_dataset* truth,
                                     size_t graph, double* nmse, double* baseline_nmse);
/* Codes new signals (NaN = missing) under the frozen kernels. */
SGKL_API sgkl_status sgkl_infer(const sgkl_model* model, size_t graph, const double* values,
                                size_t nodes, size_t signals, double* out);
SGKL_API sgkl_status sgkl_infer_csv(const sgkl_model* model, size_t graph,
                                    const char* signals_csv, const char* out_csv);
SGKL_API void sgkl_model_free(sgkl_model* model);

/* Experiments */
SGKL_API sgkl_status sgkl_run_sweep(const char* config_json, const char* parameter,
                                    const double* grid, size_t grid_len, const uint64_t* seeds,
                                    size_t seed_count, unsigned jobs, sgkl_report** out);
SGKL_API sgkl_status sgkl_run_joint_vs_individual(const char* config_json, const double* deltas,
                                                  size_t delta_count, const size_t* ks,
                                                  size_t k_count, const uint64_t* seeds,
                                                  size_t seed_count, unsigned jobs,
                                                  sgkl_report** out);
/* format is "csv" or "json". */
SGKL_API sgkl_status sgkl_report_write(const sgkl_report* report, const char* path,
                                       const char* format, int with_timing);
/* Copies at most cap bytes including the terminator; needed gets the full size. */
SGKL_API sgkl_status sgkl_report_render(const sgkl_report* report, const char* format,
                                        int with_timing, char* buf, size_t cap, size_t* needed);
SGKL_API sgkl_status sgkl_report_load(const char* path, const char* format, sgkl_report** out);
SGKL_API sgkl_status sgkl_report_run_count(const sgkl_report* report, size_t* count);
SGKL_API sgkl_status sgkl_report_run(const sgkl_report* report, size_t index, double* value,
                                     double* nmse, double* baseline_nmse, uint64_t* seed);
SGKL_API sgkl_status sgkl_report_threshold_count(const sgkl_report* report, size_t* count);
SGKL_API sgkl_status sgkl_report_threshold(const sgkl_report* report, size_t index,
                                           double* delta_psi, double* threshold_k);
SGKL_API void sgkl_report_free(sgkl_report* report);

#ifdef __cplusplus
}
#endif

#endif

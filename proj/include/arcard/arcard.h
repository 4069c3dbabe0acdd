/*
 * Copyright 2026 The arcard Authors
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

/*
 * C interface to the arcard engine.
 *
 * Every function returns an arcard_status; on failure the thread's last
 * error message is available from arcard_last_error(). Strings returned
 * through char** are owned by the caller and released with
 * arcard_string_free(). Output pointers are set to NULL when a call fails.
 * Option arguments are JSON objects (NULL or "" for defaults); see
 * query_io.hpp for the keys.
 */

#ifndef ARCARD_ARCARD_H_
#define ARCARD_ARCARD_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ARCARD_API __declspec(dllexport)
#else
#define ARCARD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum arcard_status {
  ARCARD_OK = 0,
  ARCARD_CYCLE_DETECTED = 1,
  ARCARD_DISCONNECTED = 2,
  ARCARD_UNKNOWN_COLUMN = 3,
  ARCARD_DUPLICATE_NAME = 4,
  ARCARD_QUERY_NOT_SUBTREE = 5,
  ARCARD_BAD_LITERAL_TYPE = 6,
  ARCARD_MISSING_COLUMN = 7,
  ARCARD_TYPE_PARSE_ERROR = 8,
  ARCARD_IO_ERROR = 9,
  ARCARD_SCHEMA_MISMATCH = 10,
  ARCARD_OVERFLOW = 11,
  ARCARD_INDEX_MISS = 12,
  ARCARD_TOKEN_OUT_OF_RANGE = 13,
  ARCARD_SUBTOKEN_OUT_OF_RANGE = 14,
  ARCARD_UNSUPPORTED_OPERATOR = 15,
  ARCARD_LAYOUT_MISMATCH = 16,
  ARCARD_NON_FINITE_LOSS = 17,
  ARCARD_VERSION_MISMATCH = 18,
  ARCARD_CORRUPT_CHECKPOINT = 19,
  ARCARD_TOO_LARGE = 20,
  ARCARD_EMPTY_JOIN_GRAPH = 21,
  ARCARD_CONFIG_ERROR = 22,
  ARCARD_INVALID_ARGUMENT = 23,
  ARCARD_INTERNAL = 24
} arcard_status;

typedef struct arcard_dataset arcard_dataset;
typedef struct arcard_model arcard_model;
typedef struct arcard_backend arcard_backend;

ARCARD_API const char* arcard_version(void);
ARCARD_API const char* arcard_status_name(arcard_status status);
/* Message of the last failed call on this thread; "" if none. */
ARCARD_API const char* arcard_last_error(void);
ARCARD_API void arcard_string_free(char* s);

/* Datasets */
ARCARD_API arcard_status arcard_dataset_ingest(const char* schema_path, const char* data_dir,
                                               arcard_dataset** out);
ARCARD_API arcard_status arcard_dataset_load_snapshot(const char* path, arcard_dataset** out);
ARCARD_API arcard_status arcard_dataset_save_snapshot(const arcard_dataset* ds, const char* path);
ARCARD_API void arcard_dataset_free(arcard_dataset* ds);
/* |J| as a decimal string. */
ARCARD_API arcard_status arcard_dataset_full_join_size(const arcard_dataset* ds, char** out);
ARCARD_API arcard_status arcard_dataset_counts_json(const arcard_dataset* ds, char** out);
/* Writes `rows` uniform full-join samples as CSV. */
ARCARD_API arcard_status arcard_dataset_sample_csv(const arcard_dataset* ds, uint64_t rows,
                                                   uint64_t seed, uint32_t workers,
                                                   const char* out_path);
ARCARD_API arcard_status arcard_dataset_materialize_csv(const arcard_dataset* ds, uint64_t cap,
                                                        const char* out_path);
ARCARD_API arcard_status arcard_true_cardinality(const arcard_dataset* ds, const char* query_json,
                                                 char** out);

/* Models */
ARCARD_API arcard_status arcard_model_create(const arcard_dataset* ds, const char* config_json,
                                             uint32_t factorization_bits, uint64_t seed,
                                             arcard_model** out);
/* Report JSON to *report (may be NULL). */
ARCARD_API arcard_status arcard_model_train(arcard_model* model, const arcard_dataset* ds,
                                            const char* options_json, char** report);
ARCARD_API arcard_status arcard_model_save(const arcard_model* model, const char* path);
ARCARD_API arcard_status arcard_model_load(const char* path, arcard_model** out);
ARCARD_API void arcard_model_free(arcard_model* model);

/* Backends. A model backend borrows the model, which must outlive it. An
 * exact backend materializes the full join; cap 0 selects the default limit. */
ARCARD_API arcard_status arcard_backend_from_model(const arcard_model* model, arcard_backend** out);
ARCARD_API arcard_status arcard_backend_exact(const arcard_dataset* ds, uint32_t factorization_bits,
                                              uint64_t cap, arcard_backend** out);
ARCARD_API void arcard_backend_free(arcard_backend* backend);

/* Estimation and evaluation. Inputs and outputs are JSON lines. */
ARCARD_API arcard_status arcard_estimate(const arcard_dataset* ds, const arcard_backend* backend,
                                         const char* queries_jsonl, const char* options_json,
                                         char** out);
ARCARD_API arcard_status arcard_generate_workload(const arcard_dataset* ds, const char* spec_json,
                                                  char** out);
ARCARD_API arcard_status arcard_evaluate(const arcard_dataset* ds, const arcard_backend* backend,
                                         const char* workload_jsonl, const char* options_json,
                                         char** out);
ARCARD_API arcard_status arcard_synth(const char* params_json, const char* out_dir);
ARCARD_API arcard_status arcard_simulate_updates(const arcard_dataset* ds, const char* spec_json,
                                                 char** out);

#ifdef __cplusplus
}
#endif

#endif /* ARCARD_ARCARD_H_ */

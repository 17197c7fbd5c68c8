/* Copyright 2026 The urbanscene Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the urbanscene library. Objects are opaque handles owned
 * by the caller and released with the matching *_free function. Strings
 * returned through char** are released with us_string_free. Every call that
 * can fail returns a us_status; the message of the most recent failure on
 * the calling thread is available from us_last_error.
 */

#ifndef URBANSCENE_H
#define URBANSCENE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define US_API __declspec(dllexport)
#else
#define US_API __attribute__((visibility("default")))
#endif

typedef enum us_status {
  US_OK = 0,
  US_ERR_INVALID_ARGUMENT = 1,
  US_ERR_PARSE = 2,
  US_ERR_IO = 3,
  US_ERR_DEGENERATE = 4,
  US_ERR_NOT_FOUND = 5,
  US_ERR_TRANSPORT = 6,
  US_ERR_CONTEXT_LIMIT = 7,
  US_ERR_ALIGNMENT = 8,
  US_ERR_FIXTURE = 9,
  US_ERR_INTERNAL = 10
} us_status;

/* Ablation flags. */
#define US_DROP_IDENTITY 1u
#define US_DROP_GEOMETRIC 2u
#define US_DROP_VISUAL 4u
#define US_DROP_RELATIONSHIP 8u

typedef struct us_config us_config;
typedef struct us_ssd us_ssd;
typedef struct us_qa_set us_qa_set;
typedef struct us_report us_report;

US_API const char* us_version(void);
US_API const char* us_status_name(us_status status);
/* Empty string when the last call on this thread succeeded. */
US_API const char* us_last_error(void);
US_API void us_string_free(char* s);

/* Scene configuration. */
US_API us_status us_config_load(const char* path, us_config** out);
US_API void us_config_free(us_config* config);
/* Output paths declared in the config, or NULL. */
US_API const char* us_config_ssd_output(const us_config* config);
US_API const char* us_config_qa_output(const us_config* config);
US_API uint64_t us_config_seed(const us_config* config);

/* Runs the pipeline. `warnings_json`, when non-NULL, receives a JSON array
 * of {stage, subject, message}. */
US_API us_status us_describe(const us_config* config, us_ssd** out, char** warnings_json);

/* Scene descriptions. */
US_API us_status us_ssd_parse(const char* text, us_ssd** out);
US_API us_status us_ssd_load(const char* path, us_ssd** out);
US_API us_status us_ssd_save(const us_ssd* ssd, const char* path);
US_API us_status us_ssd_serialize(const us_ssd* ssd, char** out);
US_API us_status us_ssd_apply_ablation(const us_ssd* ssd, unsigned mask, us_ssd** out);
US_API size_t us_ssd_object_count(const us_ssd* ssd);
US_API void us_ssd_free(us_ssd* ssd);
US_API size_t us_estimate_tokens(const char* text);

/* Question sets. */
US_API us_status us_qa_generate(const us_ssd* ssd, size_t per_category, uint64_t seed, us_qa_set** out,
                                char** warnings_json);
US_API us_status us_qa_load(const char* path, us_qa_set** out);
US_API us_status us_qa_save(const us_qa_set* qa, const char* path);
US_API size_t us_qa_count(const us_qa_set* qa);
US_API void us_qa_free(us_qa_set* qa);

/* Evaluation. `config` may be NULL, which leaves only the built-in
 * "oracle" respondent. An unknown respondent yields US_ERR_NOT_FOUND. */
US_API us_status us_eval_run(const us_config* config, const char* respondent, const us_ssd* ssd, const us_qa_set* qa,
                             unsigned mask, us_report** out);
US_API us_status us_report_save_json(const us_report* report, const char* path);
US_API us_status us_report_save_csv(const us_report* report, const char* path);
US_API us_status us_report_json(const us_report* report, char** out);
/* Macro (per-category mean) or micro (per-item) overall ratio. */
US_API double us_report_overall(const us_report* report, int micro);
US_API size_t us_report_total(const us_report* report);
US_API size_t us_report_correct(const us_report* report);
/* 1 when every item received a reply. */
US_API int us_report_is_complete(const us_report* report);
US_API void us_report_free(us_report* report);

/* Free-form question; `transcript_json` receives the persisted record when
 * non-NULL. */
US_API us_status us_ask(const us_config* config, const char* respondent, const us_ssd* ssd, const char* question,
                        char** reply, char** transcript_json);

/* Registration diagnostics as JSON; writes a PGM raster when raster_path is
 * non-NULL. `passed` receives 1 when every residual is within threshold. */
US_API us_status us_align_check(const us_config* config, const char* raster_path, char** report_json, int* passed);

/* Geodesy helpers. */
US_API double us_haversine_distance(double lon1, double lat1, double lon2, double lat2);
US_API us_status us_bearing(double lon1, double lat1, double lon2, double lat2, double* out);

/* Writes a synthetic scene and its config.json into `dir`. caption_mode is
 * one of "scripted", "record", "replay" or "none". */
US_API us_status us_synthesize_scene(const char* dir, const char* name, size_t buildings, uint64_t seed,
                                     const char* caption_mode);

#ifdef __cplusplus
}
#endif

#endif /* URBANSCENE_H */

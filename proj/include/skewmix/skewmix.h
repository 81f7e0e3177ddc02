#ifndef SKEWMIX_SKEWMIX_H
#define SKEWMIX_SKEWMIX_H

/* C interface of the skewmix library. Every function returns a status code;
 * on failure skm_last_error() holds a message for the calling thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(SKM_BUILDING_LIBRARY)
#define SKM_API __attribute__((visibility("default")))
#else
#define SKM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum skm_status {
  SKM_OK = 0,
  SKM_ERR_INVALID_ARGUMENT = 1,
  SKM_ERR_PARSE = 2,
  SKM_ERR_IO = 3,
  SKM_ERR_NUMERICAL = 4,
  SKM_ERR_DEGENERATE = 5,
  SKM_ERR_INTERNAL = 6
} skm_status;

typedef struct skm_dataset skm_dataset;

typedef void (*skm_progress_fn)(int32_t iteration, double power_loglik, int32_t active_clusters,
                                double eta_acceptance, void* user);

SKM_API const char* skm_version(void);
SKM_API const char* skm_last_error(void);
SKM_API const char* skm_status_name(skm_status status);

SKM_API skm_status skm_dataset_read_csv(const char* path, skm_dataset** out);
SKM_API skm_status skm_dataset_write_csv(const skm_dataset* data, const char* path);
SKM_API skm_status skm_dataset_shape(const skm_dataset* data, int64_t* n, int32_t* p, int32_t* J);
/* Row-major n x p copy; `len` is the capacity of `out` in doubles. */
SKM_API skm_status skm_dataset_values(const skm_dataset* data, double* out, size_t len);
/* 0-based sample index of each observation. */
SKM_API skm_status skm_dataset_samples(const skm_dataset* data, int32_t* out, size_t len);
/* 1-based true cluster of each observation; only for simulated datasets. */
SKM_API skm_status skm_dataset_truth(const skm_dataset* data, int32_t* out, size_t len);
SKM_API void skm_dataset_free(skm_dataset* data);

/* Three bivariate skew-normal clusters in three samples; `distorted` applies
 * the asymmetric narrowing. */
SKM_API skm_status skm_simulate_replica(int32_t n_per_sample, int32_t distorted, uint64_t seed,
                                        skm_dataset** out);

/* Runs the pipeline described by a JSON config (see the README). With a
 * non-empty "zetas" list this is a sweep. `progress` may be NULL. */
SKM_API skm_status skm_run(const char* config_json, skm_progress_fn progress, void* user);

#ifdef __cplusplus
}
#endif

#endif

/*
 * bevmotion — self-supervised bird's-eye-view motion prediction from point
 * cloud sequences.
 *
 * C interface to the shared library. All objects are opaque handles created
 * and destroyed through these functions; every fallible call returns a
 * bm_status. On failure, bm_last_error() returns a human-readable message
 * for the calling thread.
 */

#ifndef BEVMOTION_H
#define BEVMOTION_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bm_status {
    BM_OK = 0,
    BM_ERROR = 1,          /* internal error or invalid argument */
    BM_ERROR_CONFIG = 2,   /* invalid or unparseable configuration */
    BM_ERROR_IO = 3,       /* missing, unreadable or truncated files */
    BM_ERROR_NUMERIC = 4,  /* numeric failure in a solver */
    BM_ERROR_FORMAT = 5    /* file format version or checksum mismatch */
} bm_status;

typedef struct bm_config bm_config;
typedef struct bm_dataset bm_dataset;
typedef struct bm_model bm_model;

const char* bm_version(void);
const char* bm_status_name(bm_status status);

/* Message describing the most recent failure on this thread. */
const char* bm_last_error(void);

/* ---- configuration ---- */

/* Creates a configuration holding every key at its default value. */
bm_status bm_config_create(bm_config** out_config);
void bm_config_free(bm_config* config);

/* Merges keys from a "key = value" text file. Unknown keys are rejected. */
bm_status bm_config_load_file(bm_config* config, const char* path);

/* Sets one key. Unknown keys are rejected. */
bm_status bm_config_set(bm_config* config, const char* key, const char* value);

/* Copies the value of one key into buf (NUL-terminated). */
bm_status bm_config_get(const bm_config* config, const char* key, char* buf,
                        size_t buf_size);

/* 16 hex character hash of the full configuration. buf_size >= 17. */
bm_status bm_config_hash(const bm_config* config, char* buf, size_t buf_size);

/* ---- datasets ---- */

bm_status bm_dataset_open(const char* dir, bm_dataset** out_dataset);
void bm_dataset_free(bm_dataset* dataset);
bm_status bm_dataset_frame_count(const bm_dataset* dataset, int* out_count);
bm_status bm_dataset_point_count(const bm_dataset* dataset, int frame, int* out_count);
bm_status bm_dataset_grid_dims(const bm_dataset* dataset, int* out_rows, int* out_cols);

/* ---- models ---- */

bm_status bm_model_load(const char* checkpoint_path, bm_model** out_model);
void bm_model_free(bm_model* model);
bm_status bm_model_param_count(const bm_model* model, uint64_t* out_count);

/* ---- commands ----
 *
 * Each command creates a run directory under out_parent named
 * <config-hash>-<utc-timestamp>, writes its reports there, and copies the
 * run directory path into run_dir_buf when the buffer is non-NULL.
 */

/* Generates a synthetic dataset (written under <run-dir>/dataset). */
bm_status bm_run_gen(const bm_config* config, const char* out_parent,
                     char* run_dir_buf, size_t buf_size);

/* Pseudo-label dump plus recovery statistics against the ground truth. */
bm_status bm_run_pseudo(const bm_config* config, const char* dataset_dir,
                        const char* out_parent, char* run_dir_buf, size_t buf_size);

/* Full training run: checkpoint, loss curves and metric reports. */
bm_status bm_run_train(const bm_config* config, const char* dataset_dir,
                       const char* out_parent, char* run_dir_buf, size_t buf_size);

/* Evaluates a checkpoint on a dataset. */
bm_status bm_run_eval(const bm_config* config, const char* dataset_dir,
                      const char* checkpoint_path, const char* out_parent,
                      char* run_dir_buf, size_t buf_size);

/* Trains the 8-row loss-term on/off grid and tabulates the metrics. */
bm_status bm_run_ablate(const bm_config* config, const char* dataset_dir,
                        const char* out_parent, char* run_dir_buf, size_t buf_size);

/* Solver and pseudo-labeling timings. */
bm_status bm_run_bench(const bm_config* config, const char* out_parent,
                       char* run_dir_buf, size_t buf_size);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BEVMOTION_H */

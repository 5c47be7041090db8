/*
 * octoformer C API: autoregressive 3D shape generation over compressed
 * octree token sequences.
 *
 * Every function returns an octf_status; on failure octf_last_error() holds
 * a message for the calling thread. Objects are opaque handles released with
 * the matching *_free function (free functions accept NULL).
 */
#ifndef OCTOFORMER_H
#define OCTOFORMER_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define OCTF_API __declspec(dllexport)
#else
#define OCTF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum octf_status {
    OCTF_OK = 0,
    OCTF_ERR_INVALID_ARGUMENT = 1,
    OCTF_ERR_FORMAT = 2,
    OCTF_ERR_IO = 3,
    OCTF_ERR_RUNTIME = 4,
} octf_status;

typedef struct octf_grid octf_grid;
typedef struct octf_sequence octf_sequence;
typedef struct octf_model octf_model;

/* Message describing the calling thread's most recent failure. */
OCTF_API const char* octf_last_error(void);

/* ---- voxel grids (OCTV container) ---- */
OCTF_API octf_status octf_grid_create(uint32_t resolution, octf_grid** out);
OCTF_API octf_status octf_grid_load(const char* path, octf_grid** out);
OCTF_API octf_status octf_grid_save(const octf_grid* grid, const char* path);
OCTF_API octf_status octf_grid_resolution(const octf_grid* grid, uint32_t* out);
OCTF_API octf_status octf_grid_get(const octf_grid* grid, uint32_t x, uint32_t y, uint32_t z, int* out);
OCTF_API octf_status octf_grid_set(octf_grid* grid, uint32_t x, uint32_t y, uint32_t z, int value);
OCTF_API octf_status octf_grid_count_full(const octf_grid* grid, uint64_t* out);
OCTF_API void octf_grid_free(octf_grid* grid);

/* ---- token sequences (octoseq text files) ---- */
OCTF_API octf_status octf_sequence_from_grid(const octf_grid* grid, octf_sequence** out);
OCTF_API octf_status octf_sequence_to_grid(const octf_sequence* seq, uint32_t resolution, octf_grid** out);
OCTF_API octf_status octf_sequence_load(const char* path, octf_sequence** out);
OCTF_API octf_status octf_sequence_save(const octf_sequence* seq, const char* path);
OCTF_API octf_status octf_sequence_length(const octf_sequence* seq, size_t* out);
/* value in {1,2,3}; ids are the per-axis spatial ids */
OCTF_API octf_status octf_sequence_token(const octf_sequence* seq, size_t index, int* value, int* depth,
                                         uint32_t* idx, uint32_t* idy, uint32_t* idz);
OCTF_API octf_status octf_sequence_class(const octf_sequence* seq, int* out); /* -1 when unset */
OCTF_API octf_status octf_sequence_set_class(octf_sequence* seq, int label);  /* -1 clears */
OCTF_API void octf_sequence_free(octf_sequence* seq);

/* ---- models (OCTM checkpoints) ---- */
/* config_json: {"model": {...}} (or full train config file contents) */
OCTF_API octf_status octf_model_create(const char* config_json, uint64_t seed, octf_model** out);
OCTF_API octf_status octf_model_load(const char* path, octf_model** out);
OCTF_API octf_status octf_model_save(const octf_model* model, const char* path);
OCTF_API octf_status octf_model_config(const octf_model* model, char* buf, size_t buf_len, size_t* needed);
OCTF_API void octf_model_free(octf_model* model);

/* ---- training ---- */
/* corpus_dir holds OCTV files (+ optional manifest.csv with class labels);
 * config_json may carry both "model" (ignored here) and "train" sections;
 * metrics_csv may be NULL. */
OCTF_API octf_status octf_train(octf_model* model, const char* corpus_dir, const char* config_json,
                                const char* metrics_csv);
OCTF_API octf_status octf_bits_per_token(octf_model* model, const char* corpus_dir, double* out);

/* ---- sampling ---- */
/* class_label -1 = unconditional; max_depth 0 = model max; temperature 0 = argmax */
OCTF_API octf_status octf_sample(octf_model* model, double temperature, int max_depth, int class_label,
                                 uint64_t seed, octf_sequence** out_seq, octf_grid** out_grid);
OCTF_API octf_status octf_superresolve(octf_model* model, const octf_sequence* prefix, int target_depth,
                                       double temperature, uint64_t seed, octf_sequence** out_seq,
                                       octf_grid** out_grid);

/* ---- evaluation ---- */
typedef struct octf_metrics {
    double cov_percent;
    double mmd_scaled; /* x 1e4 */
    double mmd_raw;
    uint64_t gen_count;
    uint64_t ref_count;
} octf_metrics;

OCTF_API octf_status octf_evaluate(octf_model* model, const char* ref_dir, int multiplier, double temperature,
                                   int class_label, uint64_t seed, octf_metrics* out);

/* ---- datasets, stats, export ---- */
/* kind: box|sphere|cylinder|union|mixed; per_shape_labels gives shape i label i */
OCTF_API octf_status octf_make_dataset(const char* kind, uint32_t resolution, int count, int per_shape_labels,
                                       uint64_t seed, const char* out_dir);
/* Table of 90th-percentile token counts per depth and scheme latent counts. */
OCTF_API octf_status octf_corpus_stats(const char* corpus_dir, const char* scheme, char* buf, size_t buf_len,
                                       size_t* needed);
OCTF_API octf_status octf_export_obj(const octf_grid* grid, const char* path);
OCTF_API octf_status octf_export_slices(const octf_grid* grid, const char* dir);

#ifdef __cplusplus
}
#endif

#endif /* OCTOFORMER_H */

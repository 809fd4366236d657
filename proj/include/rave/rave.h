/* Copyright (C) 2026 The RAVE Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the RAVE video-editing library.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns a rave_status; on
 * failure rave_last_error() describes the problem for the calling thread.
 * Strings returned through char** are released with rave_string_free().
 */
#ifndef RAVE_RAVE_H
#define RAVE_RAVE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RAVE_BUILDING_LIBRARY)
#    define RAVE_API __declspec(dllexport)
#  else
#    define RAVE_API __declspec(dllimport)
#  endif
#else
#  define RAVE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rave_status {
    RAVE_OK = 0,
    RAVE_ERR_INVALID_ARGUMENT = 1,
    RAVE_ERR_IO = 2,
    RAVE_ERR_SHAPE = 3,
    RAVE_ERR_SCHEMA = 4,
    RAVE_ERR_REPLAY_MISMATCH = 5,
    RAVE_ERR_ADAPTER = 6,
    RAVE_ERR_UNAVAILABLE = 7,
    RAVE_ERR_INTERNAL = 99
} rave_status;

RAVE_API const char* rave_version(void);
RAVE_API const char* rave_last_error(void);
RAVE_API const char* rave_status_name(rave_status status);
RAVE_API void rave_string_free(char* s);

/* ---- Video ------------------------------------------------------------ */

typedef struct rave_video rave_video;

/* target_width/target_height of 0 keep the source resolution. */
RAVE_API rave_status rave_video_load(const char* dir, int target_width, int target_height, rave_video** out);
RAVE_API rave_status rave_video_save(const rave_video* video, const char* dir);
/* pixels: frame_count * height * width * 3 values in [-1, 1], HWC per frame. */
RAVE_API rave_status rave_video_create(size_t frame_count, int width, int height, const double* pixels,
                                       rave_video** out);
RAVE_API void rave_video_free(rave_video* video);
RAVE_API size_t rave_video_frame_count(const rave_video* video);
RAVE_API int rave_video_width(const rave_video* video);
RAVE_API int rave_video_height(const rave_video* video);
/* Copies frame k (height * width * 3 values) into dst of capacity n. */
RAVE_API rave_status rave_video_copy_frame(const rave_video* video, size_t k, double* dst, size_t n);

/* ---- Editing ---------------------------------------------------------- */

typedef enum rave_spacing { RAVE_SPACING_LEADING = 0, RAVE_SPACING_TRAILING = 1 } rave_spacing;

typedef struct rave_edit_options {
    int grid_rows;              /* 0: 2x2 for 8 frames, 3x3 otherwise */
    int grid_cols;
    int steps;                  /* DDIM steps for inversion and sampling */
    int train_steps;
    double beta_start;
    double beta_end;
    rave_spacing spacing;
    double guidance;            /* classifier-free guidance scale */
    uint64_t seed;
    int shuffle;                /* nonzero: fresh frame permutation every step */
    int shuffle_inversion;
    const char* prompt;
    const char* inversion_prompt;
    const char* condition;      /* "toy-edge", "depth", "lineart", "softedge" or "none" */
    const char* condition_cache_dir;  /* frame directory whose cond_<kind>/ holds cached maps; may be NULL */
    const char* codec;          /* "identity" or "block-average:<f>" */
    const char* predictor;      /* "toy-coupled", "toy-separable", "constant:<c>"; ignored with a callback */
} rave_edit_options;

RAVE_API void rave_edit_options_init(rave_edit_options* options);

/* One denoiser call on a single grid. Arrays are row-major HWC. */
typedef struct rave_predict_request {
    const double* latent;       /* grid_height * grid_width * channels */
    int grid_height;
    int grid_width;
    int channels;
    int rows;                   /* grid layout */
    int cols;
    int timestep;
    const double* text_embedding;
    size_t text_embedding_size;
    const double* condition;    /* grid_height * grid_width, may be NULL */
    int frame_width;            /* pixel size of one cell */
    int frame_height;
} rave_predict_request;

/* predict writes grid_height * grid_width * channels values to eps_out and
 * returns 0 on success. */
typedef struct rave_predictor_callbacks {
    const char* name;
    void* user_data;
    int (*predict)(void* user_data, const rave_predict_request* request, double* eps_out);
} rave_predictor_callbacks;

typedef struct rave_run rave_run;

/* predictor may be NULL to use options->predictor. */
RAVE_API rave_status rave_edit(const rave_video* source, const rave_edit_options* options,
                               const rave_predictor_callbacks* predictor, rave_video** edited, rave_run** run);

/* Inversion alone; writes the noisy latents to latents_path (see README for
 * the binary layout). */
RAVE_API rave_status rave_invert(const rave_video* source, const rave_edit_options* options,
                                 const rave_predictor_callbacks* predictor, const char* latents_path, rave_run** run);

/* Bit-exact replay. options, when not NULL, are compared field by field with
 * the recorded config; any difference returns RAVE_ERR_REPLAY_MISMATCH. */
RAVE_API rave_status rave_replay(const rave_video* source, const rave_run* run, const rave_edit_options* options,
                                 const rave_predictor_callbacks* predictor, rave_video** edited);

RAVE_API rave_status rave_run_to_json(const rave_run* run, char** json);
RAVE_API rave_status rave_run_from_json(const char* json, rave_run** run);
RAVE_API rave_status rave_run_set_artifact(rave_run* run, const char* key, const char* value);
RAVE_API void rave_run_free(rave_run* run);

/* ---- Metrics ---------------------------------------------------------- */

typedef struct rave_metrics {
    double clip_f;
    double clip_t;
    double warp_ssim;
    double q_edit;
} rave_metrics;

/* flow: "block-match", "zero" or "constant:<dx>,<dy>"; embedder: "toy". */
RAVE_API rave_status rave_evaluate(const rave_video* source, const rave_video* edited, const char* prompt,
                                   const char* embedder, const char* flow, rave_metrics* out, char** report_json);
RAVE_API rave_status rave_format_table_row(const rave_metrics* metrics, const char* label, char** row);
RAVE_API double rave_q_edit(double warp_ssim, double clip_t);

/* ---- Dataset manifests ------------------------------------------------ */

/* Returns RAVE_ERR_SCHEMA when the manifest has errors; report_json always
 * lists errors and warnings with JSON pointers when the file is readable. */
RAVE_API rave_status rave_dataset_validate(const char* path, char** report_json);
RAVE_API rave_status rave_dataset_summarize(const char* path, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* RAVE_RAVE_H */

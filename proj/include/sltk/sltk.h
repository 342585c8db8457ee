/* sltk: markerless monocular 3D motion tracking engine.
 *
 * C interface to the tracking core. All handles are opaque; every function
 * that can fail returns an sltk_status, and sltk_last_error() carries the
 * detail message for the calling thread.
 */
#ifndef SLTK_H
#define SLTK_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sltk_status {
  SLTK_OK = 0,
  SLTK_ERR_INVALID_ARGUMENT = 1,
  SLTK_ERR_BAD_DIMENSIONS = 2,
  SLTK_ERR_OUT_OF_BOUNDS = 3,
  SLTK_ERR_INNER_ON_EDGE = 4,
  SLTK_ERR_ALL_ZERO_IMAGE = 5,
  SLTK_ERR_NONMONOTONIC_TIMESTAMP = 6,
  SLTK_ERR_PARSE = 7,
  SLTK_ERR_IO = 8,
  SLTK_ERR_UNKNOWN_KEY = 9,
  SLTK_ERR_BAD_STATE = 10,
  SLTK_ERR_BUFFER_TOO_SMALL = 11,
  SLTK_ERR_END_OF_STREAM = 12
} sltk_status;

typedef enum sltk_mode {
  SLTK_MODE_INITIALIZING = 0,
  SLTK_MODE_SEARCHING = 1,
  SLTK_MODE_TRACKING = 2,
  SLTK_MODE_VALIDATING = 3,
  SLTK_MODE_RECOVERING = 4
} sltk_mode;

const char* sltk_version(void);
const char* sltk_status_name(sltk_status status);
const char* sltk_mode_name(sltk_mode mode);
/* Message for the most recent failure on this thread ("" if none). */
const char* sltk_last_error(void);

/* ---- configuration ------------------------------------------------------ */

typedef struct sltk_config sltk_config;

sltk_config* sltk_config_new(void);
void sltk_config_free(sltk_config* cfg);
sltk_status sltk_config_set(sltk_config* cfg, const char* key, const char* value);
sltk_status sltk_config_load_file(sltk_config* cfg, const char* path);
/* Writes the full key=value listing; sets *needed to the required size
 * (including the terminator) and fails with BUFFER_TOO_SMALL if cap is
 * insufficient. buf may be NULL to query the size. */
sltk_status sltk_config_print(const sltk_config* cfg, char* buf, size_t cap,
                              size_t* needed);

/* ---- tracking ------------------------------------------------------------ */

typedef struct sltk_estimate {
  int32_t centroid_x, centroid_y;
  double area;
  int32_t inner_x, inner_y;
  int32_t iterations;
  int32_t ray_budget_exhausted;
} sltk_estimate;

typedef struct sltk_trace_record {
  int64_t frame;
  int64_t t_ms;
  int32_t mode_count;
  int32_t modes[8]; /* sltk_mode values, entry mode first */
  int32_t has_movement;
  int64_t movement;
  int32_t compensation;
  int32_t has_estimate;
  sltk_estimate estimate;
  int32_t has_output;
  double x, y, z;                /* smoothed output coordinates */
  double raw_x, raw_y, raw_z;    /* unsmoothed, valid with has_output */
} sltk_trace_record;

typedef struct sltk_tracker sltk_tracker;

sltk_tracker* sltk_tracker_new(const sltk_config* cfg);
void sltk_tracker_free(sltk_tracker* tracker);
/* rgb is width*height*3 interleaved bytes. Timestamps must strictly increase. */
sltk_status sltk_tracker_step(sltk_tracker* tracker, const uint8_t* rgb,
                              int32_t width, int32_t height, int64_t timestamp_ms,
                              sltk_trace_record* out);
/* Subsampled frame of the last preprocessed step, for annotated dumps.
 * rgb_out must hold target_width*target_height*3 bytes. */
sltk_status sltk_tracker_subsampled(const sltk_tracker* tracker, uint8_t* rgb_out,
                                    int32_t* width, int32_t* height);

/* ---- one-shot estimation -------------------------------------------------- */

/* magnitudes is a width*height gradient image; algorithm is one of
 * "nray", "iter-nray", "nyray", "nyray-raster". */
sltk_status sltk_estimate_image(const uint8_t* magnitudes, int32_t width,
                                int32_t height, int32_t inner_x, int32_t inner_y,
                                const char* algorithm, const sltk_config* cfg,
                                sltk_estimate* out);

/* ---- frame sources -------------------------------------------------------- */

typedef struct sltk_source sltk_source;

sltk_status sltk_source_open_ppm_dir(const char* dir, double fps, sltk_source** out);
sltk_status sltk_source_open_raw(const char* path, sltk_source** out);
sltk_status sltk_source_open_scene_file(const char* path, sltk_source** out);
void sltk_source_free(sltk_source* source);
int32_t sltk_source_width(const sltk_source* source);
int32_t sltk_source_height(const sltk_source* source);
double sltk_source_fps(const sltk_source* source);
/* Fills rgb_buf (cap >= width*height*3) and *timestamp_ms. Returns SLTK_OK,
 * SLTK_ERR_END_OF_STREAM, or an error. */
sltk_status sltk_source_next(sltk_source* source, uint8_t* rgb_buf, size_t cap,
                             int64_t* timestamp_ms);

/* ---- scene synthesis ------------------------------------------------------ */

/* Renders the scene script at `scene_path` into the raw container at
 * `out_path`. */
sltk_status sltk_synth_file(const char* scene_path, const char* out_path);

/* ---- trace formatting ----------------------------------------------------- */

const char* sltk_trace_csv_header(void);
/* format is "jsonl" or "csv"; writes one line without trailing newline. */
sltk_status sltk_trace_format(const sltk_trace_record* rec, const char* format,
                              char* buf, size_t cap, size_t* needed);

/* ---- image helpers for tools ---------------------------------------------- */

sltk_status sltk_write_ppm(const char* path, const uint8_t* rgb, int32_t width,
                           int32_t height);
sltk_status sltk_read_pgm(const char* path, uint8_t* buf, size_t cap,
                          int32_t* width, int32_t* height);

#ifdef __cplusplus
}
#endif

#endif /* SLTK_H */

/*
 * Copyright 2026 The polarsim Authors
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
 * C interface of the polarsim library.
 *
 * Objects are opaque handles released with their *_free function. Every
 * fallible call returns a ps_status; on failure the message is available
 * from ps_last_error() on the same thread until the next failing call.
 * Strings returned through char** are owned by the caller and released with
 * ps_string_free().
 */

#ifndef POLARSIM_POLARSIM_H_
#define POLARSIM_POLARSIM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PS_API __declspec(dllexport)
#else
#define PS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ps_status {
  PS_OK = 0,
  PS_ERR_STRUCTURAL = 1, /* shapes or dimensions disagree */
  PS_ERR_PARAMETER = 2,  /* argument out of range */
  PS_ERR_VALIDATION = 3, /* physically invalid data */
  PS_ERR_IO = 4,         /* file cannot be read or written */
  PS_ERR_FORMAT = 5,     /* malformed file or config */
  PS_ERR_DIVERGED = 6,   /* training produced a non-finite loss */
  PS_ERR_INTERNAL = 7
} ps_status;

typedef struct ps_image ps_image;   /* named float planes (POLR) */
typedef struct ps_model ps_model;   /* trained network */
typedef struct ps_config ps_config; /* key=value settings */

PS_API const char* ps_version(void);
PS_API const char* ps_last_error(void);
PS_API const char* ps_status_name(ps_status s);
PS_API void ps_string_free(char* s);

/* --- Images --------------------------------------------------------------- */

PS_API ps_status ps_image_read(const char* path, ps_image** out);
PS_API ps_status ps_image_write(const ps_image* img, const char* path);
PS_API void ps_image_free(ps_image* img);
PS_API int ps_image_width(const ps_image* img);
PS_API int ps_image_height(const ps_image* img);
PS_API int ps_image_channels(const ps_image* img);
/* NULL when the index is out of range. */
PS_API const char* ps_image_channel_name(const ps_image* img, int index);
/* Copies width*height samples of the named channel into `dst`. */
PS_API ps_status ps_image_get_channel(const ps_image* img, const char* name, double* dst, size_t capacity);
/* 8-bit gamma-2.2 PNG of one channel or of "r,g,b". */
PS_API ps_status ps_image_write_png(const ps_image* img, const char* channels, const char* path);

/* --- Scenes and capture ----------------------------------------------------- */

typedef struct ps_scene_params {
  const char* kind; /* gradient | checker | shapes | perlin */
  int height;
  int width;
  double dolp_max;
  double correlation;
  double texture;
  uint64_t seed;
} ps_scene_params;

PS_API void ps_scene_params_default(ps_scene_params* p);
PS_API ps_status ps_generate_scene(const ps_scene_params* p, ps_image** out);

typedef struct ps_sensor_params {
  const char* layout; /* conventional | sparse */
  int r_denominator;  /* 4, 16 or 64 for sparse; ignored for conventional */
  double t;
  double f_n;
  double q_e;
  double full_scale;
  uint64_t seed;
} ps_sensor_params;

PS_API void ps_sensor_params_default(ps_sensor_params* p);
/* Output channels: raw, class. */
PS_API ps_status ps_capture(const ps_image* scene, const ps_sensor_params* p, ps_image** out);

/* --- Reconstruction and evaluation --------------------------------------- */

typedef struct ps_compensate_params {
  const char* method;   /* nearest | bilinear | joint-bilateral | toy-SNA */
  double t;             /* transmittance used at capture */
  double sigma_spatial; /* joint bilateral; <= 0 selects the default */
  double sigma_range;
  const ps_model* model; /* required for toy-SNA */
} ps_compensate_params;

PS_API void ps_compensate_params_default(ps_compensate_params* p);
/* Output channels: r, g, b, s0, s1, s2, dolp, aolp (scene-referred). */
PS_API ps_status ps_compensate(const ps_image* raw, const ps_compensate_params* p, ps_image** out);

/* Quality of a prediction (s0,s1,s2[,r,g,b]) against a scene or another
 * prediction; writes a one-row CSV. */
PS_API ps_status ps_evaluate(const ps_image* prediction, const ps_image* truth, char** csv);

/* --- Training ------------------------------------------------------------- */

typedef struct ps_train_params {
  int n_scenes;
  int size;
  int r_denominator;
  double t;
  double f_n;
  int epochs;
  int batch_size;
  double lr;
  double lr_decay;
  double lambda0;
  const char* optimizer; /* adam | momentum */
  const char* mode;      /* stokes_s12 | stokes_full | four_angle */
  int base_channels;
  int use_rgbrn;
  int use_ftb;
  int use_afa;
  int learn_gain;
  uint64_t seed;
} ps_train_params;

PS_API void ps_train_params_default(ps_train_params* p);
/* Trains on a procedural dataset; `log_csv` may be NULL. */
PS_API ps_status ps_train(const ps_train_params* p, ps_model** out, char** log_csv);
PS_API ps_status ps_model_save(const ps_model* m, const char* path);
PS_API ps_status ps_model_load(const char* path, ps_model** out);
PS_API void ps_model_free(ps_model* m);
PS_API size_t ps_model_parameter_count(const ps_model* m);

/* --- Benchmark and analysis -------------------------------------------------- */

typedef struct ps_bench_params {
  int size;
  int test_scenes;
  int train_scenes;
  int epochs;
  double t;
  const double* noise_factors; /* NULL selects {0.72, 3.6} */
  size_t n_noise_factors;
  const int* r_denominators;   /* NULL selects {4, 16, 64} */
  size_t n_r_denominators;
  int include_conventional;
  int include_sna;
  const ps_model* model; /* optional: used instead of per-point training */
  uint64_t seed;
  int threads; /* 0: POLARSIM_THREADS or hardware concurrency */
} ps_bench_params;

PS_API void ps_bench_params_default(ps_bench_params* p);
PS_API ps_status ps_bench(const ps_bench_params* p, char** csv);

/* Resolution table (r, rgb_factor, pol_factor) and SNR table (t, snr_ratio). */
PS_API ps_status ps_analyze(double t, char** resolution_csv, char** snr_csv);

/* --- Config ----------------------------------------------------------------- */

PS_API ps_status ps_config_read(const char* path, ps_config** out);
PS_API ps_status ps_config_parse(const char* text, ps_config** out);
PS_API void ps_config_free(ps_config* c);
/* NULL when the key is absent. */
PS_API const char* ps_config_get(const ps_config* c, const char* key);
PS_API int ps_config_size(const ps_config* c);
PS_API const char* ps_config_key(const ps_config* c, int index);

#ifdef __cplusplus
}
#endif

#endif /* POLARSIM_POLARSIM_H_ */

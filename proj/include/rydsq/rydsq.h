/*
 * Copyright 2026 The rydsq Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface of the rydsq simulation and analysis library.
 *
 * Every function returns a rydsq_status. On failure the message of the most
 * recent error on the calling thread is available from rydsq_last_error().
 * Strings returned through char** are owned by the caller and released with
 * rydsq_string_free(). Configuration objects are passed as JSON text; unknown
 * keys are rejected.
 */

#ifndef RYDSQ_RYDSQ_H
#define RYDSQ_RYDSQ_H

#include <stddef.h>
#include <stdint.h>

#if defined(RYDSQ_BUILDING_LIBRARY)
#define RYDSQ_API __attribute__((visibility("default")))
#else
#define RYDSQ_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rydsq_status {
    RYDSQ_OK = 0,
    RYDSQ_ERR_INVALID_ARGUMENT = 1,
    RYDSQ_ERR_NUMERICAL = 2,
    RYDSQ_ERR_IO = 3,
    RYDSQ_ERR_INTERNAL = 4
} rydsq_status;

typedef enum rydsq_adev_axis { RYDSQ_AXIS_TIME = 0, RYDSQ_AXIS_COUNT = 1 } rydsq_adev_axis;

typedef struct rydsq_geometry rydsq_geometry;
typedef struct rydsq_record rydsq_record;

RYDSQ_API const char *rydsq_version(void);
RYDSQ_API const char *rydsq_last_error(void);
RYDSQ_API const char *rydsq_status_name(rydsq_status status);
RYDSQ_API void rydsq_string_free(char *s);

/* Geometry from a layout object
 * {"rows", "cols", "spacing" (int or [x, y]), "n_subarrays", "gap", "lattice_constant_nm",
 *  "allow_small_gap"}. */
RYDSQ_API rydsq_status rydsq_geometry_create(const char *layout_json, rydsq_geometry **out);
RYDSQ_API rydsq_status rydsq_geometry_size(const rydsq_geometry *g, size_t *n);
RYDSQ_API rydsq_status rydsq_geometry_distance(const rydsq_geometry *g, size_t i, size_t j, double *meters);
RYDSQ_API void rydsq_geometry_free(rydsq_geometry *g);

/* Weak-dressing soft-core parameters from lab units (MHz, MHz, GHz um^6). */
RYDSQ_API rydsq_status rydsq_weak_dressing_potential(
    double omega_r_mhz, double delta_mhz, double c6_ghz_um6, double *v0_hz, double *r_b_m);

/* Soft-core fit of a pair-oscillation CSV (r_lat, freq_hz, err_hz); JSON report. */
RYDSQ_API rydsq_status rydsq_fit_potential(const char *csv_path, char **report_json);

/* Weak-dressing Wineland parameter of one geometry at interaction time t (s). */
RYDSQ_API rydsq_status rydsq_weak_dressing_xi(
    const rydsq_geometry *g,
    double v0_hz,
    double r_b_m,
    double t_int,
    double *xi_w_sq,
    double *contrast,
    double *alpha_opt);

/* Optimal squeezing versus array size; CSV (N, rows, cols, t_int_us, alpha_opt_deg, contrast,
 * var_ratio_min, xi_db). */
RYDSQ_API rydsq_status rydsq_scan_squeezing(const char *config_json, char **csv);

/* Exact spin-echo evolution over a list of interaction times; JSON report. */
RYDSQ_API rydsq_status rydsq_ed_evolve(const char *config_json, char **report_json);

/* Synthetic measurement records. */
RYDSQ_API rydsq_status rydsq_simulate_clock(const char *config_json, uint64_t seed, rydsq_record **out);
RYDSQ_API rydsq_status rydsq_record_read(const char *path, rydsq_record **out);
RYDSQ_API rydsq_status rydsq_record_parse(const char *csv_text, rydsq_record **out);
RYDSQ_API rydsq_status rydsq_record_write(const rydsq_record *r, const char *path);
RYDSQ_API rydsq_status rydsq_record_to_csv(const rydsq_record *r, char **csv);
RYDSQ_API rydsq_status rydsq_record_size(const rydsq_record *r, size_t *n_shots);
RYDSQ_API rydsq_status rydsq_record_shot(const rydsq_record *r, size_t index, double *p_a, double *p_b);
RYDSQ_API void rydsq_record_free(rydsq_record *r);

/* Overlapping Allan deviation of raw samples at octave averaging factors.
 * Buffers hold at least n / 3 entries; *n_points receives the count. */
RYDSQ_API rydsq_status rydsq_overlapping_adev(
    const double *y,
    size_t n,
    double sample_interval,
    rydsq_adev_axis axis,
    size_t *n_points,
    double *tau,
    double *adev,
    double *err);

/* Differential stability of a record; curve CSV (m, tau_s, adev, err) and fit JSON. */
RYDSQ_API rydsq_status rydsq_allan(const rydsq_record *r, const char *config_json, char **curve_csv, char **fit_json);

/* Calibrated ellipse-fitting pipeline; JSON report and jackknife Allan CSV. */
RYDSQ_API rydsq_status rydsq_ellipse_fit(
    const rydsq_record *cal,
    const rydsq_record *meas,
    const char *config_json,
    uint64_t seed,
    char **report_json,
    char **adev_csv);

/* Fisher information of the phase for a list of phases; JSON report. */
RYDSQ_API rydsq_status rydsq_fisher(const char *config_json, char **report_json);

/* zeta whose tempering scales the variance at p by `ratio`. */
RYDSQ_API rydsq_status rydsq_zeta_for_variance_ratio(int n_atoms, double p, double ratio, double *zeta);

#ifdef __cplusplus
}
#endif

#endif

/* Copyright 2026 The sqkit Authors
 * SPDX-License-Identifier: Apache-2.0
 */

/* C interface to libsqkit.
 *
 * Every object is an opaque handle created by a sqk_* function and released
 * with the matching *_free function; passing NULL to a *_free function is a
 * no-op. Functions that can fail return a sqk_status and write their result
 * through the last pointer argument only on success. The message of the most
 * recent failure on the calling thread is available from sqk_last_error().
 *
 * Strings returned through char** are heap allocated and must be released with
 * sqk_string_free(). Lengths are in millimetres unless stated otherwise.
 */

#ifndef SQKIT_SQKIT_H_
#define SQKIT_SQKIT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(SQK_BUILDING_LIBRARY)
#define SQK_API __declspec(dllexport)
#else
#define SQK_API __declspec(dllimport)
#endif
#else
#define SQK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sqk_status {
  SQK_OK = 0,
  SQK_ERR_NULL_ARGUMENT = 1,
  SQK_ERR_INPUT = 2,     /* unreadable or malformed input */
  SQK_ERR_ALGORITHM = 3, /* the computation could not produce a result */
  SQK_ERR_CONTRACT = 4,  /* a precondition on the arguments was violated */
  SQK_ERR_INTERNAL = 5
} sqk_status;

typedef struct sqk_superquadric sqk_superquadric;
typedef struct sqk_cloud sqk_cloud;
typedef struct sqk_mesh sqk_mesh;
typedef struct sqk_voxel_grid sqk_voxel_grid;
typedef struct sqk_fit_report sqk_fit_report;

SQK_API const char* sqk_version(void);
/* Never NULL; empty when no call on this thread has failed yet. */
SQK_API const char* sqk_last_error(void);
SQK_API void sqk_string_free(char* s);

/* ---- superquadrics ------------------------------------------------------ */

/* params = (eps1, eps2, ax, ay, az, rx, ry, rz, tx, ty, tz), rotation as an
 * axis-angle vector in radians. */
SQK_API sqk_status sqk_superquadric_create(const double params[11],
                                           sqk_superquadric** out);
SQK_API sqk_status sqk_superquadric_from_json(const char* json,
                                              sqk_superquadric** out);
SQK_API sqk_status sqk_superquadric_load(const char* path, sqk_superquadric** out);
SQK_API sqk_status sqk_superquadric_to_json(const sqk_superquadric* sq, char** out);
SQK_API sqk_status sqk_superquadric_params(const sqk_superquadric* sq,
                                           double out[11]);
SQK_API void sqk_superquadric_free(sqk_superquadric* sq);

SQK_API sqk_status sqk_inside_outside(const sqk_superquadric* sq, const double p[3],
                                      double* out);
SQK_API sqk_status sqk_radial_distance(const sqk_superquadric* sq, const double p[3],
                                       double* out);
/* index 0 is the identity; 1 and 2 map local z onto x and y; 3 turns 90
 * degrees about z. */
SQK_API sqk_status sqk_duality_candidate(const sqk_superquadric* sq, int index,
                                         sqk_superquadric** out);
SQK_API sqk_status sqk_canonicalize(const sqk_superquadric* sq,
                                    sqk_superquadric** out);

/* ---- point clouds ------------------------------------------------------- */

/* xyz holds 3 * n doubles. */
SQK_API sqk_status sqk_cloud_create(const double* xyz, size_t n, sqk_cloud** out);
/* .obj and .ply give their vertices; any other extension is read as "x y z"
 * text. */
SQK_API sqk_status sqk_cloud_load(const char* path, sqk_cloud** out);
SQK_API sqk_status sqk_cloud_save(const sqk_cloud* cloud, const char* path);
SQK_API sqk_status sqk_cloud_to_text(const sqk_cloud* cloud, char** out);
SQK_API size_t sqk_cloud_size(const sqk_cloud* cloud);
/* Writes 3 * sqk_cloud_size(cloud) doubles. */
SQK_API sqk_status sqk_cloud_points(const sqk_cloud* cloud, double* xyz);
SQK_API void sqk_cloud_free(sqk_cloud* cloud);

SQK_API sqk_status sqk_sample_surface(const sqk_superquadric* sq, size_t n,
                                      uint64_t seed, sqk_cloud** out);

/* ---- meshes ------------------------------------------------------------- */

/* Non-zero when the path names a mesh file (.obj or .ply). */
SQK_API int sqk_path_is_mesh(const char* path);
SQK_API sqk_status sqk_mesh_load(const char* path, sqk_mesh** out);
SQK_API sqk_status sqk_mesh_save_obj(const sqk_mesh* mesh, const char* path);
SQK_API sqk_status sqk_mesh_to_obj(const sqk_mesh* mesh, char** out);
SQK_API sqk_status sqk_mesh_counts(const sqk_mesh* mesh, size_t* vertices,
                                   size_t* faces);
SQK_API sqk_status sqk_mesh_is_watertight(const sqk_mesh* mesh, int* out);
SQK_API sqk_status sqk_mesh_area(const sqk_mesh* mesh, double* out);
/* Signed volume; positive for outward-oriented closed meshes. */
SQK_API sqk_status sqk_mesh_volume(const sqk_mesh* mesh, double* out);
SQK_API void sqk_mesh_free(sqk_mesh* mesh);

SQK_API sqk_status sqk_make_mesh(const sqk_superquadric* sq, int resolution,
                                 sqk_mesh** out);
SQK_API sqk_status sqk_resample_mesh(const sqk_mesh* mesh, size_t n, uint64_t seed,
                                     sqk_cloud** out);

/* ---- voxel grids -------------------------------------------------------- */

SQK_API sqk_status sqk_voxelize_mesh(const sqk_mesh* mesh, double voxel_size,
                                     sqk_voxel_grid** out);
SQK_API sqk_status sqk_voxelize_superquadric(const sqk_superquadric* sq,
                                             double voxel_size,
                                             sqk_voxel_grid** out);
SQK_API sqk_status sqk_voxel_grid_info(const sqk_voxel_grid* grid, double origin[3],
                                       double* voxel_size, size_t dims[3],
                                       size_t* occupied);
SQK_API void sqk_voxel_grid_free(sqk_voxel_grid* grid);

/* ---- fitting ------------------------------------------------------------ */

typedef struct sqk_fit_config {
  int max_iters;
  double tol;           /* relative log-likelihood change */
  double outlier_prior; /* w0 in [0, 1) */
  double sigma_init;    /* <= 0 selects 5% of the bounding-box diagonal */
  uint64_t seed;
  size_t max_points;    /* 0 keeps every point */
  int switch_every;
  int reestimate_outlier_prior;
  int lm_iterations;
} sqk_fit_config;

SQK_API void sqk_fit_config_default(sqk_fit_config* config);
/* config may be NULL for the defaults. */
SQK_API sqk_status sqk_fit(const sqk_cloud* cloud, const sqk_fit_config* config,
                           sqk_fit_report** out);
SQK_API sqk_status sqk_fit_report_theta(const sqk_fit_report* report,
                                        sqk_superquadric** out);
SQK_API sqk_status sqk_fit_report_summary(const sqk_fit_report* report, double* sigma,
                                          int* iterations, int* converged,
                                          int* switched);
SQK_API sqk_status sqk_fit_report_to_json(const sqk_fit_report* report,
                                          int with_responsibilities, char** out);
SQK_API void sqk_fit_report_free(sqk_fit_report* report);

/* ---- metrics ------------------------------------------------------------ */

/* squared != 0 gives mm^2, otherwise mean Euclidean distances in mm. */
SQK_API sqk_status sqk_chamfer(const sqk_cloud* a, const sqk_cloud* b, int squared,
                               double* out);
SQK_API sqk_status sqk_penetration_superquadric(const sqk_cloud* hand,
                                                const sqk_superquadric* object,
                                                double* out);
SQK_API sqk_status sqk_penetration_mesh(const sqk_cloud* hand, const sqk_mesh* object,
                                        double* out);
/* cm^3 */
SQK_API sqk_status sqk_intersection_volume(const sqk_voxel_grid* a,
                                           const sqk_voxel_grid* b, double* out);
/* Both clouds must hold exactly 21 joints. */
SQK_API sqk_status sqk_mepe(const sqk_cloud* pred, const sqk_cloud* gt, double* out);
SQK_API sqk_status sqk_theta_l1(const sqk_superquadric* a, const sqk_superquadric* b,
                                double* out);
SQK_API sqk_status sqk_metric_to_json(const char* name, double value,
                                      const char* units, char** out);

/* ---- splits ------------------------------------------------------------- */

/* Manifests and predictions are JSON-lines text; folds and summaries are JSON
 * documents. nouns may be NULL to make one fold per noun of the manifest. */
SQK_API sqk_status sqk_splits_make_s1(const char* manifest, const char* const* nouns,
                                      size_t noun_count, char** folds_json);
SQK_API sqk_status sqk_splits_make_s2(const char* manifest, const char* const* first,
                                      const char* const* second, size_t pair_count,
                                      char** folds_json);
SQK_API sqk_status sqk_splits_make_s2_seeded(const char* manifest, uint64_t seed,
                                             size_t pair_count, char** folds_json);
/* Ground-truth labels ("verb noun") come from the manifest. */
SQK_API sqk_status sqk_splits_score(const char* folds_json, const char* predictions,
                                    const char* manifest, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* SQKIT_SQKIT_H_ */

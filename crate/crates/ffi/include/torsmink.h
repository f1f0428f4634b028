#ifndef TORSMINK_H
#define TORSMINK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. `TM_STATUS_OK` is zero.
 */
typedef enum TmStatus {
  TM_STATUS_OK = 0,
  TM_STATUS_NULL_POINTER = 1,
  TM_STATUS_INVALID_INPUT = 2,
  TM_STATUS_HEMISPHERE_VIOLATION = 3,
  TM_STATUS_EMPTY_INTERIOR = 4,
  TM_STATUS_UNBOUNDED = 5,
  TM_STATUS_DEGENERATE_GEOMETRY = 6,
  TM_STATUS_SOLVER_DIVERGED = 7,
  TM_STATUS_IDENTITY_MISMATCH = 8,
  TM_STATUS_P_CRITICAL = 9,
  TM_STATUS_MAX_ITERS_EXCEEDED = 10,
  TM_STATUS_MISSING_FACET = 11,
  TM_STATUS_ORIGIN_ON_BOUNDARY = 12,
  TM_STATUS_BUFFER_TOO_SMALL = 13,
  TM_STATUS_PANIC = 14,
} TmStatus;

/**
 * A discrete measure on the unit circle.
 */
typedef struct TmMeasure TmMeasure;

/**
 * A convex polygon.
 */
typedef struct TmPolygon TmPolygon;

/**
 * The outcome of a solve.
 */
typedef struct TmSolveReport TmSolveReport;

/**
 * Solver settings; start from [`tm_solve_options_default`].
 */
typedef struct TmSolveOptions {
  double mesh_h;
  double tol_residual;
  size_t max_iters;
  uint64_t seed;
} TmSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length in bytes of the calling thread's last error message, without the
 * terminating NUL; zero when there is none.
 */
size_t tm_last_error_length(void);

/**
 * Copies the last error message, NUL-terminated, into `buf`.
 *
 * Returns the number of bytes written excluding the NUL, or -1 when `buf`
 * is null or shorter than `tm_last_error_length() + 1`.
 *
 * # Safety
 * `buf` must be valid for `len` bytes of writes.
 */
int tm_last_error_message(char *buf, size_t len);

/**
 * Builds a measure from atom angles (radians) and positive weights.
 *
 * # Safety
 * `angles` and `weights` must each hold `count` values; `out` must be writable.
 */
enum TmStatus tm_measure_new(const double *angles,
                             const double *weights,
                             size_t count,
                             struct TmMeasure **out);

/**
 * Number of atoms after near-duplicate normals were merged.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t tm_measure_len(const struct TmMeasure *m);

/**
 * # Safety
 * `m` must be null or a handle from `tm_measure_new` not yet freed.
 */
void tm_measure_free(struct TmMeasure *m);

/**
 * Builds a convex polygon from `count` vertices stored as `x0, y0, x1, y1, …`.
 *
 * # Safety
 * `xy` must hold `2 * count` values; `out` must be writable.
 */
enum TmStatus tm_polygon_new(const double *xy, size_t count, struct TmPolygon **out);

/**
 * Number of vertices, in counter-clockwise order.
 *
 * # Safety
 * `p` must be null or a live handle.
 */
size_t tm_polygon_vertex_count(const struct TmPolygon *p);

/**
 * Writes the vertices as `x0, y0, …` into `xy`, which holds `capacity` values.
 *
 * # Safety
 * `p` must be a live handle and `xy` valid for `capacity` writes.
 */
enum TmStatus tm_polygon_vertices(const struct TmPolygon *p, double *xy, size_t capacity);

/**
 * # Safety
 * `p` must be null or a handle not yet freed.
 */
void tm_polygon_free(struct TmPolygon *p);

/**
 * `∩_i {x : x·ξ_i ≤ supports_i}` over the atoms of `m`.
 *
 * # Safety
 * `supports` must hold `tm_measure_len(m)` values; `out` must be writable.
 */
enum TmStatus tm_wulff_shape(const struct TmMeasure *m,
                             const double *supports,
                             size_t count,
                             struct TmPolygon **out);

/**
 * Torsional rigidity at element size `mesh_h`.
 *
 * # Safety
 * `p` must be a live handle and `rigidity` writable.
 */
enum TmStatus tm_rigidity(const struct TmPolygon *p, double mesh_h, double *rigidity);

/**
 * Per-facet torsion measures, one per vertex-ordered facet; facet `k` runs
 * from vertex `k` to vertex `k + 1`.
 *
 * # Safety
 * `p` must be a live handle and `measures` valid for `capacity` writes.
 */
enum TmStatus tm_facet_measures(const struct TmPolygon *p,
                                double mesh_h,
                                double *measures,
                                size_t capacity);

/**
 * Exact Hausdorff distance between two polygons.
 *
 * # Safety
 * Both handles must be live and `distance` writable.
 */
enum TmStatus tm_hausdorff(const struct TmPolygon *a, const struct TmPolygon *b, double *distance);

struct TmSolveOptions tm_solve_options_default(void);

/**
 * Solves the original problem, or the normalized one when `normalized` is
 * nonzero. `options` may be null for the defaults.
 *
 * # Safety
 * `m` must be a live handle, `options` null or readable, `out` writable.
 */
enum TmStatus tm_solve(const struct TmMeasure *m,
                       double p,
                       int normalized,
                       const struct TmSolveOptions *options,
                       struct TmSolveReport **out);

/**
 * Optimality residual of the returned solution.
 *
 * # Safety
 * `r` must be null or a live handle; null gives NaN.
 */
double tm_report_residual(const struct TmSolveReport *r);

/**
 * Rigidity of the normalized solution.
 *
 * # Safety
 * `r` must be null or a live handle; null gives NaN.
 */
double tm_report_rigidity(const struct TmSolveReport *r);

/**
 * Descent steps taken.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t tm_report_iterations(const struct TmSolveReport *r);

/**
 * A new polygon handle holding the solution: the original-problem body when
 * `original` is nonzero and it exists, otherwise the normalized body.
 *
 * # Safety
 * `r` must be a live handle and `out` writable.
 */
enum TmStatus tm_report_solution(const struct TmSolveReport *r,
                                 int original,
                                 struct TmPolygon **out);

/**
 * The full report as a NUL-terminated JSON string; release with [`tm_string_free`].
 *
 * # Safety
 * `r` must be a live handle and `out` writable.
 */
enum TmStatus tm_report_to_json(const struct TmSolveReport *r, char **out);

/**
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void tm_report_free(struct TmSolveReport *r);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void tm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TORSMINK_H */

#ifndef SPINHARM_H
#define SPINHARM_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Group selector for quadrature grids.
 */
typedef enum ShGroup {
  SH_GROUP_SU2 = 0,
  SH_GROUP_SO3 = 1,
} ShGroup;

/*
 Status codes.
 */
typedef enum ShStatus {
  SH_STATUS_OK = 0,
  SH_STATUS_NULL_POINTER = 1,
  SH_STATUS_INVALID_INPUT = 2,
  SH_STATUS_BUFFER_TOO_SMALL = 3,
  SH_STATUS_AXIS_UNDEFINED = 4,
  SH_STATUS_GIBBS_SINGULARITY = 5,
  SH_STATUS_CHART_SINGULAR = 6,
  SH_STATUS_RESOLUTION_MISMATCH = 7,
  SH_STATUS_RANK_OUT_OF_RANGE = 8,
  SH_STATUS_NOT_IN_IDEAL = 9,
  SH_STATUS_QUADRATURE_FAILURE = 10,
  SH_STATUS_STEP_UNSTABLE = 11,
  SH_STATUS_LABEL_OUT_OF_RANGE = 12,
  SH_STATUS_WINDOW_INVALID = 13,
  SH_STATUS_PANIC = 14,
} ShStatus;

/*
 Opaque result of a density evolution.
 */
typedef struct ShEvolution ShEvolution;

/*
 Opaque Haar quadrature grid.
 */
typedef struct ShGrid ShGrid;

/*
 Opaque sampled function on a grid.
 */
typedef struct ShGridFunction ShGridFunction;

/*
 One recorded time of a density evolution.
 */
typedef struct ShSnapshot {
  double t;
  double energy;
  double casimir;
  double norm;
  double pointwise_casimir_drift;
} ShSnapshot;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *sh_version(void);

/*
 Copies the last error message of this thread into `buf` (NUL-terminated, truncated to `len`).
 Returns the full message length excluding the terminator, or 0 if there is none.

 # Safety
 `buf` must be null or valid for `len` bytes of writes.
 */
uintptr_t sh_last_error_message(char *buf, uintptr_t len);

/*
 Unit quaternion (ξ⁰, ξ¹, ξ², ξ³) of the rotation vector `k`.

 # Safety
 `k` must point to 3 readable doubles and `out` to 4 writable doubles.
 */
enum ShStatus sh_quat_from_vector(const double *k, double *out);

/*
 Rotation vector with |k| ∈ [0, 2π] of a quaternion (normalized on input).

 # Safety
 `q` must point to 4 readable doubles and `out` to 3 writable doubles.
 */
enum ShStatus sh_vector_from_quat(const double *q, double *out);

/*
 Hamilton product a·b.

 # Safety
 `a` and `b` must point to 4 readable doubles each and `out` to 4 writable doubles.
 */
enum ShStatus sh_quat_multiply(const double *a, const double *b, double *out);

/*
 SO(3) image of a quaternion, row-major.

 # Safety
 `q` must point to 4 readable doubles and `out` to 9 writable doubles.
 */
enum ShStatus sh_project_so3(const double *q, double *out);

/*
 Gibbs vector of R[a]R[b]; fails with `SH_STATUS_GIBBS_SINGULARITY` for a π-rotation result.

 # Safety
 `a` and `b` must point to 3 readable doubles each and `out` to 3 writable doubles.
 */
enum ShStatus sh_gibbs_compose(const double *a, const double *b, double *out);

/*
 Character χ(j)(k) and idempotent ε(j)(k) = (2j+1)χ(j)(k) for j = two_j/2.

 # Safety
 `chi` and `eps` must each be null or point to a writable double.
 */
enum ShStatus sh_character(uint32_t two_j, double k, double *chi, double *eps);

/*
 Wigner D matrix of spin two_j/2 at `q`, row-major with rows and columns in descending m.
 Needs `len >= (two_j+1)^2`; otherwise returns `SH_STATUS_BUFFER_TOO_SMALL`.

 # Safety
 `q` must point to 4 readable doubles; `re` and `im` must each be valid for `len` writes.
 */
enum ShStatus sh_wigner_d(uint32_t two_j, const double *q, double *re, double *im, uintptr_t len);

/*
 Builds an n_k × n_theta × n_phi Haar grid.

 # Safety
 `out` must be a valid pointer; on success it receives a handle to free with [`sh_grid_free`].
 */
enum ShStatus sh_grid_new(uintptr_t n_k,
                          uintptr_t n_theta,
                          uintptr_t n_phi,
                          enum ShGroup group,
                          struct ShGrid **out);

/*
 # Safety
 `grid` must be null or a handle from [`sh_grid_new`] not yet freed.
 */
void sh_grid_free(struct ShGrid *grid);

/*
 Node count and normalized weight sum.

 # Safety
 `grid` must be a live grid handle; `len` and `weight_sum` must each be null or writable.
 */
enum ShStatus sh_grid_info(const struct ShGrid *grid, uintptr_t *len, double *weight_sum);

/*
 ε(j) sampled on `grid`, j = two_j/2.

 # Safety
 `grid` must be a live grid handle and `out` a valid pointer; free the result with
 [`sh_gridfn_free`]. The function keeps its own reference to the grid.
 */
enum ShStatus sh_gridfn_idempotent(const struct ShGrid *grid,
                                   uint32_t two_j,
                                   struct ShGridFunction **out);

/*
 Function from node values.

 # Safety
 `grid` must be a live grid handle; `re` and `im` must be valid for `len` reads and `len`
 must equal the node count; `out` must be a valid pointer.
 */
enum ShStatus sh_gridfn_from_values(const struct ShGrid *grid,
                                    const double *re,
                                    const double *im,
                                    uintptr_t len,
                                    struct ShGridFunction **out);

/*
 # Safety
 `f` must be null or a handle from this library not yet freed.
 */
void sh_gridfn_free(struct ShGridFunction *f);

/*
 (a ∗ b) at the given node indices.

 # Safety
 `a` and `b` must be live function handles; `nodes` must be valid for `count` reads and
 `re`, `im` for `count` writes.
 */
enum ShStatus sh_convolve_nodes(const struct ShGridFunction *a,
                                const struct ShGridFunction *b,
                                const uintptr_t *nodes,
                                uintptr_t count,
                                double *re,
                                double *im);

/*
 Evolves a Gaussian density (centre, width) under H = Σ σ_a²/(2I_a) on an n³ grid of [−L, L]³.

 # Safety
 `inertia` and `center` must point to 3 readable doubles; `out` must be a valid pointer and the
 result freed with [`sh_evolution_free`].
 */
enum ShStatus sh_poisson_evolve(const double *inertia,
                                const double *center,
                                double width,
                                uintptr_t n,
                                double half_width,
                                double dt,
                                uintptr_t steps,
                                uintptr_t record_every,
                                struct ShEvolution **out);

/*
 Number of recorded snapshots.

 # Safety
 `ev` must be a live evolution handle and `len` writable.
 */
enum ShStatus sh_evolution_len(const struct ShEvolution *ev, uintptr_t *len);

/*
 Snapshot `index` of an evolution.

 # Safety
 `ev` must be a live evolution handle and `out` writable.
 */
enum ShStatus sh_evolution_snapshot(const struct ShEvolution *ev,
                                    uintptr_t index,
                                    struct ShSnapshot *out);

/*
 # Safety
 `ev` must be null or a handle from [`sh_poisson_evolve`] not yet freed.
 */
void sh_evolution_free(struct ShEvolution *ev);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINHARM_H */

#ifndef SHIFTMG_H
#define SHIFTMG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum ShmgStatus {
  SHMG_STATUS_OK = 0,
  SHMG_STATUS_NULL_POINTER = 1,
  SHMG_STATUS_INVALID_ARGUMENT = 2,
  SHMG_STATUS_INVALID_GRID = 3,
  SHMG_STATUS_INVALID_MODEL = 4,
  SHMG_STATUS_SINGULAR = 5,
  SHMG_STATUS_NON_FINITE = 6,
  SHMG_STATUS_OUT_OF_RANGE = 7,
  SHMG_STATUS_INTERNAL = 8,
} ShmgStatus;

// Grid handle.
typedef struct ShmgGrid ShmgGrid;

// Medium handle.
typedef struct ShmgModel ShmgModel;

// Solution handle: field components and convergence data.
typedef struct ShmgSolution ShmgSolution;

// Solver parameters; obtain defaults from [`shmg_solver_options_default`].
typedef struct ShmgSolverOptions {
  size_t restart;
  double tol;
  size_t max_applications;
  double alpha;
  size_t levels;
  // Absorbing layer width in cells; 0 disables the layer.
  size_t abl_cells;
} ShmgSolverOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread. Valid until the next
// failing call on the same thread.
const char *shmg_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *shmg_version(void);

struct ShmgSolverOptions shmg_solver_options_default(void);

// Creates a grid of `ndim` (2 or 3) axes with per-axis cell counts and spacings.
//
// # Safety
// `dims` and `spacing` must point to `ndim` values; `out` must be writable.
enum ShmgStatus shmg_grid_new(const size_t *dims,
                              const double *spacing,
                              size_t ndim,
                              struct ShmgGrid **out);

// # Safety
// `grid` must come from [`shmg_grid_new`] and not be used afterwards.
void shmg_grid_free(struct ShmgGrid *grid);

// Number of cells, or 0 for a null handle.
//
// # Safety
// `grid` must be a live handle or null.
size_t shmg_grid_cell_count(const struct ShmgGrid *grid);

// Creates a medium from per-cell density and Lamé parameters, `n` = cell count.
//
// # Safety
// Arrays must hold `n` values; `grid` must be live; `out` must be writable.
enum ShmgStatus shmg_model_new(const struct ShmgGrid *grid,
                               const double *rho,
                               const double *mu,
                               const double *lambda,
                               size_t n,
                               struct ShmgModel **out);

// # Safety
// `model` must come from [`shmg_model_new`] and not be used afterwards.
void shmg_model_free(struct ShmgModel *model);

// Elastic solve (mixed formulation) for a unit point force along `component`
// at the top center. Solution components are the displacement per axis
// followed by the pressure.
//
// # Safety
// Handles must be live; `options` may be null for defaults; `out` must be writable.
enum ShmgStatus shmg_solve_elastic(const struct ShmgGrid *grid,
                                   const struct ShmgModel *model,
                                   double omega,
                                   size_t component,
                                   const struct ShmgSolverOptions *options,
                                   struct ShmgSolution **out);

// Acoustic solve for a unit point source at the top center; one component.
//
// # Safety
// Arrays must hold one value per cell; `options` may be null; `out` must be writable.
enum ShmgStatus shmg_solve_acoustic(const struct ShmgGrid *grid,
                                    const double *velocity,
                                    const double *rho,
                                    double omega,
                                    const struct ShmgSolverOptions *options,
                                    struct ShmgSolution **out);

// Preconditioner applications used, or 0 for a null handle.
//
// # Safety
// `sol` must be a live handle or null.
size_t shmg_solution_iterations(const struct ShmgSolution *sol);

// # Safety
// `sol` must be a live handle or null.
bool shmg_solution_converged(const struct ShmgSolution *sol);

// Final relative residual, NaN for a null handle.
//
// # Safety
// `sol` must be a live handle or null.
double shmg_solution_residual(const struct ShmgSolution *sol);

// # Safety
// `sol` must be a live handle or null.
size_t shmg_solution_component_count(const struct ShmgSolution *sol);

// Number of complex values in a component, 0 if out of range.
//
// # Safety
// `sol` must be a live handle or null.
size_t shmg_solution_len(const struct ShmgSolution *sol, size_t component);

// Copies a component as interleaved (re, im) pairs into `buf`, which must
// hold `2 * len` doubles with `len` equal to [`shmg_solution_len`].
//
// # Safety
// `sol` must be live; `buf` must be writable for `2 * len` doubles.
enum ShmgStatus shmg_solution_copy(const struct ShmgSolution *sol,
                                   size_t component,
                                   double *buf,
                                   size_t len);

// # Safety
// `sol` must come from a solve call and not be used afterwards.
void shmg_solution_free(struct ShmgSolution *sol);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHIFTMG_H */

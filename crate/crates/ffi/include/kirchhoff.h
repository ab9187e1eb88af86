#ifndef KIRCHHOFF_H
#define KIRCHHOFF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum KhStatus {
  KH_STATUS_OK = 0,
  KH_STATUS_NULL_POINTER = 1,
  KH_STATUS_INVALID_ARGUMENT = 2,
  // A vector length does not match the number of degrees of freedom.
  KH_STATUS_SHAPE = 3,
  // Linear solve, quadrature or root finding failed.
  KH_STATUS_NUMERICAL = 4,
  // The law does not support the requested operation.
  KH_STATUS_UNSUPPORTED = 5,
  // No function with positive `J` was found.
  KH_STATUS_INFEASIBLE = 6,
  KH_STATUS_PANIC = 7,
} KhStatus;

// Kirchhoff coefficient `K`.
typedef struct KhLaw KhLaw;

// Nonlinearity `f` or perturbation `g`.
typedef struct KhNonlinearity KhNonlinearity;

// Mesh plus assembled stiffness and mass matrices.
typedef struct KhOperators KhOperators;

// Distinct solutions from a deflated Newton search.
typedef struct KhSolutionSet KhSolutionSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *kh_version(void);

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *kh_last_error_message(void);

// P1 operators on `(0, length)` with `n_cells` cells.
//
// # Safety
// `out` must be valid for writing one pointer.
enum KhStatus kh_operators_interval(size_t n_cells, double length, struct KhOperators **out);

// P1 operators on `(0, lx) × (0, ly)` with `nx × ny` cells.
//
// # Safety
// `out` must be valid for writing one pointer.
enum KhStatus kh_operators_rectangle(size_t nx,
                                     size_t ny,
                                     double lx,
                                     double ly,
                                     struct KhOperators **out);

// Number of interior nodes, i.e. the length of every coefficient vector.
//
// # Safety
// `ops` must be NULL or a live handle.
size_t kh_operators_num_dofs(const struct KhOperators *ops);

// # Safety
// `ops` must be NULL or a handle not yet freed.
void kh_operators_free(struct KhOperators *ops);

// `K(t) = a + b t`.
//
// # Safety
// `out` must be valid for writing one pointer.
enum KhStatus kh_law_affine(double a, double b, struct KhLaw **out);

// `K(t) = e^{-t}`, which violates positivity; useful for negative checks.
//
// # Safety
// `out` must be valid for writing one pointer.
enum KhStatus kh_law_exp_decay(struct KhLaw **out);

// # Safety
// `law` must be NULL or a handle not yet freed.
void kh_law_free(struct KhLaw *law);

// Built-in nonlinearity by name: `bump`, `linear`, `sine`, `sine_forcing`, `zero`.
//
// # Safety
// `name` must be a NUL-terminated string; `out` valid for writing one pointer.
enum KhStatus kh_nonlinearity_specimen(const char *name, struct KhNonlinearity **out);

// # Safety
// `nl` must be NULL or a handle not yet freed.
void kh_nonlinearity_free(struct KhNonlinearity *nl);

// H¹₀ norm of `u`.
//
// # Safety
// `u` must point to `len` doubles, `out` to one writable double.
enum KhStatus kh_h1_norm(const struct KhOperators *ops, const double *u, size_t len, double *out);

// `Φ(u) = ½ K̃(‖u‖²)`.
//
// # Safety
// Handles must be live; `u` must point to `len` doubles, `out` to one writable double.
enum KhStatus kh_phi(const struct KhOperators *ops,
                     const struct KhLaw *law,
                     const double *u,
                     size_t len,
                     double *out);

// `J(u) = ∫ F(x, u)`.
//
// # Safety
// Handles must be live; `u` must point to `len` doubles, `out` to one writable double.
enum KhStatus kh_j(const struct KhOperators *ops,
                   const struct KhNonlinearity *nl,
                   const double *u,
                   size_t len,
                   double *out);

// Weak-form residual `R(u)` and its H¹₀ norm. `g` may be NULL (then `mu` is
// ignored) and `out_r` may be NULL when only the norm is wanted.
//
// # Safety
// Non-NULL handles must be live; `u` and `out_r` must hold `len` doubles.
enum KhStatus kh_residual(const struct KhOperators *ops,
                          const struct KhLaw *law,
                          const struct KhNonlinearity *f,
                          const struct KhNonlinearity *g,
                          double lambda,
                          double mu,
                          const double *u,
                          size_t len,
                          double *out_r,
                          double *out_norm);

// Left inverse `h(s)` with `h(s) K(h(s)²) = s`.
//
// # Safety
// `law` must be live, `out` writable.
enum KhStatus kh_solve_h(const struct KhLaw *law, double s, double *out);

// Upper estimate of the threshold `θ*`; the minimizer is copied to
// `out_minimizer` unless it is NULL.
//
// # Safety
// Handles must be live; `out_minimizer` must hold `len` doubles when non-NULL.
enum KhStatus kh_theta_star(const struct KhOperators *ops,
                            const struct KhLaw *law,
                            const struct KhNonlinearity *nl,
                            uint64_t seed,
                            double *out_value,
                            double *out_minimizer,
                            size_t len);

// Deflated Newton from the standard start library (seeded by `seed`).
//
// # Safety
// Non-NULL handles must be live; `out` must be valid for writing one pointer.
enum KhStatus kh_newton(const struct KhOperators *ops,
                        const struct KhLaw *law,
                        const struct KhNonlinearity *f,
                        const struct KhNonlinearity *g,
                        double lambda,
                        double mu,
                        uint64_t seed,
                        struct KhSolutionSet **out);

// Number of solutions in the set.
//
// # Safety
// `set` must be NULL or a live handle.
size_t kh_solution_set_len(const struct KhSolutionSet *set);

// Copy solution `index` (ordered by energy, then norm) into `out_u` and report
// its norm, residual norm and energy. Any output pointer may be NULL.
//
// # Safety
// `set` must be live; `out_u` must hold `len` doubles when non-NULL.
enum KhStatus kh_solution_set_get(const struct KhSolutionSet *set,
                                  size_t index,
                                  double *out_u,
                                  size_t len,
                                  double *out_norm,
                                  double *out_residual,
                                  double *out_energy);

// # Safety
// `set` must be NULL or a handle not yet freed.
void kh_solution_set_free(struct KhSolutionSet *set);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KIRCHHOFF_H */

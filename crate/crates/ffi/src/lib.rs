//! C ABI over the `kirchhoff` crate.
//!
//! Objects cross the boundary as opaque handles created by `kh_*_new`-style
//! constructors and released with the matching `kh_*_free`. Every fallible call
//! returns a [`KhStatus`]; on failure the message is available from
//! [`kh_last_error_message`] on the same thread. Panics are caught and reported
//! as [`KhStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kirchhoff::fem::{assemble, build_interval_mesh, build_rect_mesh, AssembledOperators};
use kirchhoff::model::{nonlinearity_specimen, KirchhoffLaw, Nonlinearity};
use kirchhoff::solvers::{
    dirichlet_eigenpairs, estimate_theta_star, newton_deflated, start_library, NewtonOptions, SolutionSet,
    StartOptions, ThetaOptions,
};
use kirchhoff::variational::{self, Problem};
use kirchhoff::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A vector length does not match the number of degrees of freedom.
    Shape = 3,
    /// Linear solve, quadrature or root finding failed.
    Numerical = 4,
    /// The law does not support the requested operation.
    Unsupported = 5,
    /// No function with positive `J` was found.
    Infeasible = 6,
    Panic = 7,
}

/// Mesh plus assembled stiffness and mass matrices.
pub struct KhOperators {
    ops: AssembledOperators,
}

/// Kirchhoff coefficient `K`.
pub struct KhLaw {
    law: KirchhoffLaw,
}

/// Nonlinearity `f` or perturbation `g`.
pub struct KhNonlinearity {
    nl: Nonlinearity,
}

/// Distinct solutions from a deflated Newton search.
pub struct KhSolutionSet {
    set: SolutionSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(KhStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn status_of(e: &Error) -> KhStatus {
    match e {
        Error::InvalidMesh(_) | Error::Config(_) | Error::Domain(_) => KhStatus::InvalidArgument,
        Error::Shape { .. } => KhStatus::Shape,
        Error::UnsupportedLaw(_) => KhStatus::Unsupported,
        Error::Feasibility(_) => KhStatus::Infeasible,
        Error::Context { source, .. } => status_of(source),
        _ => KhStatus::Numerical,
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KhStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside kirchhoff".into());
            KhStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(KhStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// P1 operators on `(0, length)` with `n_cells` cells.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn kh_operators_interval(n_cells: usize, length: f64, out: *mut *mut KhOperators) -> KhStatus {
    guard(|| {
        let ops = assemble(&build_interval_mesh(n_cells, length)?)?;
        write(out, boxed(KhOperators { ops }), "out")
    })
}

/// P1 operators on `(0, lx) × (0, ly)` with `nx × ny` cells.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn kh_operators_rectangle(
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    out: *mut *mut KhOperators,
) -> KhStatus {
    guard(|| {
        let ops = assemble(&build_rect_mesh(nx, ny, lx, ly)?)?;
        write(out, boxed(KhOperators { ops }), "out")
    })
}

/// Number of interior nodes, i.e. the length of every coefficient vector.
///
/// # Safety
/// `ops` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kh_operators_num_dofs(ops: *const KhOperators) -> usize {
    ops.as_ref().map_or(0, |o| o.ops.num_dofs())
}

/// # Safety
/// `ops` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kh_operators_free(ops: *mut KhOperators) {
    if !ops.is_null() {
        drop(Box::from_raw(ops));
    }
}

/// `K(t) = a + b t`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn kh_law_affine(a: f64, b: f64, out: *mut *mut KhLaw) -> KhStatus {
    guard(|| {
        if !(a > 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Failure(KhStatus::InvalidArgument, format!("affine law needs a > 0, b >= 0, got {a}, {b}")));
        }
        write(out, boxed(KhLaw { law: KirchhoffLaw::affine(a, b) }), "out")
    })
}

/// `K(t) = e^{-t}`, which violates positivity; useful for negative checks.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn kh_law_exp_decay(out: *mut *mut KhLaw) -> KhStatus {
    guard(|| write(out, boxed(KhLaw { law: KirchhoffLaw::exp_decay() }), "out"))
}

/// # Safety
/// `law` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kh_law_free(law: *mut KhLaw) {
    if !law.is_null() {
        drop(Box::from_raw(law));
    }
}

/// Built-in nonlinearity by name: `bump`, `linear`, `sine`, `sine_forcing`, `zero`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn kh_nonlinearity_specimen(name: *const c_char, out: *mut *mut KhNonlinearity) -> KhStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| Failure(KhStatus::InvalidArgument, "name is not UTF-8".into()))?;
        let nl = nonlinearity_specimen(name)?;
        write(out, boxed(KhNonlinearity { nl }), "out")
    })
}

/// # Safety
/// `nl` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kh_nonlinearity_free(nl: *mut KhNonlinearity) {
    if !nl.is_null() {
        drop(Box::from_raw(nl));
    }
}

/// H¹₀ norm of `u`.
///
/// # Safety
/// `u` must point to `len` doubles, `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn kh_h1_norm(ops: *const KhOperators, u: *const f64, len: usize, out: *mut f64) -> KhStatus {
    guard(|| {
        let ops = &handle(ops, "ops")?.ops;
        let v = ops.h1_norm(input(u, len, "u")?)?;
        write(out, v, "out")
    })
}

/// `Φ(u) = ½ K̃(‖u‖²)`.
///
/// # Safety
/// Handles must be live; `u` must point to `len` doubles, `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn kh_phi(
    ops: *const KhOperators,
    law: *const KhLaw,
    u: *const f64,
    len: usize,
    out: *mut f64,
) -> KhStatus {
    guard(|| {
        let v = variational::phi(&handle(ops, "ops")?.ops, &handle(law, "law")?.law, input(u, len, "u")?)?;
        write(out, v, "out")
    })
}

/// `J(u) = ∫ F(x, u)`.
///
/// # Safety
/// Handles must be live; `u` must point to `len` doubles, `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn kh_j(
    ops: *const KhOperators,
    nl: *const KhNonlinearity,
    u: *const f64,
    len: usize,
    out: *mut f64,
) -> KhStatus {
    guard(|| {
        let v = variational::j_functional(&handle(ops, "ops")?.ops, &handle(nl, "nl")?.nl, input(u, len, "u")?)?;
        write(out, v, "out")
    })
}

/// Weak-form residual `R(u)` and its H¹₀ norm. `g` may be NULL (then `mu` is
/// ignored) and `out_r` may be NULL when only the norm is wanted.
///
/// # Safety
/// Non-NULL handles must be live; `u` and `out_r` must hold `len` doubles.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn kh_residual(
    ops: *const KhOperators,
    law: *const KhLaw,
    f: *const KhNonlinearity,
    g: *const KhNonlinearity,
    lambda: f64,
    mu: f64,
    u: *const f64,
    len: usize,
    out_r: *mut f64,
    out_norm: *mut f64,
) -> KhStatus {
    guard(|| {
        let g = g.as_ref().map(|g| &g.nl);
        let (r, norm) = variational::residual(
            &handle(ops, "ops")?.ops,
            &handle(law, "law")?.law,
            &handle(f, "f")?.nl,
            g,
            lambda,
            if g.is_some() { mu } else { 0.0 },
            input(u, len, "u")?,
        )?;
        if !out_r.is_null() {
            output(out_r, len, "out_r")?.copy_from_slice(&r);
        }
        write(out_norm, norm, "out_norm")
    })
}

/// Left inverse `h(s)` with `h(s) K(h(s)²) = s`.
///
/// # Safety
/// `law` must be live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kh_solve_h(law: *const KhLaw, s: f64, out: *mut f64) -> KhStatus {
    guard(|| {
        let v = handle(law, "law")?.law.solve_h(s)?;
        write(out, v, "out")
    })
}

/// Upper estimate of the threshold `θ*`; the minimizer is copied to
/// `out_minimizer` unless it is NULL.
///
/// # Safety
/// Handles must be live; `out_minimizer` must hold `len` doubles when non-NULL.
#[no_mangle]
pub unsafe extern "C" fn kh_theta_star(
    ops: *const KhOperators,
    law: *const KhLaw,
    nl: *const KhNonlinearity,
    seed: u64,
    out_value: *mut f64,
    out_minimizer: *mut f64,
    len: usize,
) -> KhStatus {
    guard(|| {
        let ops = &handle(ops, "ops")?.ops;
        let est = estimate_theta_star(ops, &handle(law, "law")?.law, &handle(nl, "nl")?.nl, &ThetaOptions::default(), seed)?;
        if !out_minimizer.is_null() {
            let out = output(out_minimizer, len, "out_minimizer")?;
            if len != est.minimizer.len() {
                return Err(Failure(KhStatus::Shape, format!("expected length {}, got {len}", est.minimizer.len())));
            }
            out.copy_from_slice(&est.minimizer);
        }
        write(out_value, est.value, "out_value")
    })
}

/// Deflated Newton from the standard start library (seeded by `seed`).
///
/// # Safety
/// Non-NULL handles must be live; `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn kh_newton(
    ops: *const KhOperators,
    law: *const KhLaw,
    f: *const KhNonlinearity,
    g: *const KhNonlinearity,
    lambda: f64,
    mu: f64,
    seed: u64,
    out: *mut *mut KhSolutionSet,
) -> KhStatus {
    guard(|| {
        let ops = &handle(ops, "ops")?.ops;
        let law = &handle(law, "law")?.law;
        let f = &handle(f, "f")?.nl;
        let g = g.as_ref().map(|g| &g.nl);
        let theta = match estimate_theta_star(ops, law, f, &ThetaOptions::default(), seed) {
            Ok(t) => Some(t.minimizer),
            Err(Error::Feasibility(_)) => None,
            Err(e) => return Err(e.into()),
        };
        let opts = StartOptions::default();
        let eigen = dirichlet_eigenpairs(ops, opts.eigen_count)?;
        let starts = start_library(ops.num_dofs(), &eigen, theta.as_ref(), &opts, seed);
        let mut problem = Problem::new(ops, law, f).with_params(lambda, if g.is_some() { mu } else { 0.0 });
        problem.g = g;
        let set = newton_deflated(&problem, &starts, &NewtonOptions::default())?;
        write(out, boxed(KhSolutionSet { set }), "out")
    })
}

/// Number of solutions in the set.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kh_solution_set_len(set: *const KhSolutionSet) -> usize {
    set.as_ref().map_or(0, |s| s.set.len())
}

/// Copy solution `index` (ordered by energy, then norm) into `out_u` and report
/// its norm, residual norm and energy. Any output pointer may be NULL.
///
/// # Safety
/// `set` must be live; `out_u` must hold `len` doubles when non-NULL.
#[no_mangle]
pub unsafe extern "C" fn kh_solution_set_get(
    set: *const KhSolutionSet,
    index: usize,
    out_u: *mut f64,
    len: usize,
    out_norm: *mut f64,
    out_residual: *mut f64,
    out_energy: *mut f64,
) -> KhStatus {
    guard(|| {
        let set = &handle(set, "set")?.set;
        let p = set.points.get(index).ok_or_else(|| {
            Failure(KhStatus::InvalidArgument, format!("index {index} out of range for {} solutions", set.len()))
        })?;
        if !out_u.is_null() {
            if len != p.u.len() {
                return Err(Failure(KhStatus::Shape, format!("expected length {}, got {len}", p.u.len())));
            }
            output(out_u, len, "out_u")?.copy_from_slice(&p.u);
        }
        for (ptr, v) in [(out_norm, p.energies.norm), (out_residual, p.residual_norm), (out_energy, p.energies.total)] {
            if !ptr.is_null() {
                ptr.write(v);
            }
        }
        Ok(())
    })
}

/// # Safety
/// `set` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kh_solution_set_free(set: *mut KhSolutionSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

//! The iteration `u ← T(λ J′(u) + μ Ψ′(u))`.
//!
//! Fixed points satisfy `Φ′(u) = λ J′(u) + μ Ψ′(u)` because `T` inverts `Φ′`.
//! Nothing guarantees convergence, so failure is a value, not an error.

use serde::{Deserialize, Serialize};

use super::{CriticalPoint, Origin};
use crate::error::{Error, Result};
use crate::fem::FeFunction;
use crate::variational::{inverse_t, Problem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedPointOptions {
    /// Stop when `‖u_{k+1} − u_k‖ ≤ step_tol (1 + ‖u_k‖)`.
    pub step_tol: f64,
    pub max_iter: usize,
    pub accept_tol: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions { step_tol: 1e-10, max_iter: 500, accept_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FixedPointOutcome {
    Converged(CriticalPoint),
    Diverged {
        reason: String,
        iterations: usize,
        last_step: f64,
        last_norm: f64,
        /// Residual of the final iterate.
        residual_norm: f64,
    },
}

impl FixedPointOutcome {
    pub fn point(&self) -> Option<&CriticalPoint> {
        match self {
            FixedPointOutcome::Converged(p) => Some(p),
            FixedPointOutcome::Diverged { .. } => None,
        }
    }
}

pub fn fixed_point_t(problem: &Problem<'_>, u0: &[f64], opts: &FixedPointOptions) -> Result<FixedPointOutcome> {
    if !(opts.step_tol > 0.0 && opts.accept_tol > 0.0) {
        return Err(Error::Config("fixed-point tolerances must be positive".into()));
    }
    let ops = problem.ops;
    ops.check_len(u0)?;
    let mut u = FeFunction::new(u0.to_vec());
    let mut last_step = f64::NAN;
    let mut norm = ops.h1_norm(&u)?;
    for it in 1..=opts.max_iter {
        let rhs = problem.rhs_load(&u)?;
        let v = ops.riesz_solve(&rhs)?;
        let next = inverse_t(ops, problem.law, &v)?;
        if !next.is_finite() {
            return diverged(problem, &u, "non-finite iterate", it, last_step, norm);
        }
        last_step = ops.h1_distance(&next, &u)?;
        let converged = last_step <= opts.step_tol * (1.0 + norm);
        u = next;
        norm = ops.h1_norm(&u)?;
        if converged {
            let (_, res) = problem.residual(&u)?;
            if res <= opts.accept_tol {
                return Ok(FixedPointOutcome::Converged(CriticalPoint {
                    energies: problem.energy(&u)?,
                    u,
                    residual_norm: res,
                    iterations: it,
                    origin: Origin::FixedPoint,
                }));
            }
            return diverged(problem, &u, "stalled with residual above tolerance", it, last_step, norm);
        }
    }
    diverged(problem, &u, "iteration limit reached", opts.max_iter, last_step, norm)
}

fn diverged(
    problem: &Problem<'_>,
    u: &[f64],
    reason: &str,
    iterations: usize,
    last_step: f64,
    last_norm: f64,
) -> Result<FixedPointOutcome> {
    let residual_norm = if u.iter().all(|v| v.is_finite()) { problem.residual(u)?.1 } else { f64::NAN };
    Ok(FixedPointOutcome::Diverged { reason: reason.into(), iterations, last_step, last_norm, residual_norm })
}

//! Armijo gradient descent on `E = Φ − λJ − μΨ` in the H¹₀ metric.
//!
//! The trial step is the Barzilai-Borwein length when it is positive; backtracking
//! then enforces sufficient decrease, so the energy trace stays monotone. Once the
//! relative gradient test holds, a few undeflated Newton steps bring the residual
//! under the absolute acceptance tolerance, which energy comparisons alone cannot
//! resolve when `|E|` is large.

use serde::{Deserialize, Serialize};

use super::newton::polish;
use super::{CriticalPoint, NewtonOptions, Origin};
use crate::error::{Error, Result};
use crate::fem::FeFunction;
use crate::variational::Problem;

const STALL_WINDOW: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DescentOptions {
    /// Relative gradient tolerance: stop at `‖∇E‖ ≤ grad_tol (1 + |E|)`.
    pub grad_tol: f64,
    /// Absolute residual the Newton polish aims for.
    pub accept_tol: f64,
    pub max_iter: usize,
    pub armijo: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions { grad_tol: 1e-8, accept_tol: 1e-8, max_iter: 20_000, armijo: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentOutcome {
    pub point: CriticalPoint,
    pub converged: bool,
    /// Energy after every accepted step, starting with `E(u0)`.
    pub energy_trace: Vec<f64>,
    /// Newton iterations spent polishing, if the polish was used and accepted.
    pub polish_iterations: Option<usize>,
}

pub fn minimize_energy(problem: &Problem<'_>, u0: &[f64], opts: &DescentOptions) -> Result<DescentOutcome> {
    if !(opts.grad_tol > 0.0 && opts.accept_tol > 0.0 && opts.armijo > 0.0 && opts.armijo < 1.0) {
        return Err(Error::Config("descent tolerances must be positive and armijo in (0, 1)".into()));
    }
    let ops = problem.ops;
    ops.check_len(u0)?;
    let mut u = FeFunction::new(u0.to_vec());
    let mut e = problem.energy(&u)?.total;
    let mut trace = vec![e];
    let (mut g, mut gnorm) = problem.residual(&u)?;
    let mut step = 1.0 / problem.law.k(ops.h1_inner(&u, &u)?.max(0.0)).max(f64::MIN_POSITIVE);
    let mut converged = false;
    let mut stalled = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if gnorm <= opts.grad_tol * (1.0 + e.abs()) {
            converged = true;
            break;
        }
        iterations += 1;
        let mut accepted = false;
        while step > 1e-16 {
            let trial = u.plus_scaled(-step, &g);
            let et = problem.energy(&trial)?.total;
            if et.is_finite() && et <= e - opts.armijo * step * gnorm * gnorm {
                u = trial;
                e = et;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            stalled = true;
            break;
        }
        trace.push(e);
        // energy differences have hit roundoff: hand over to the polish
        if trace.len() > STALL_WINDOW && trace[trace.len() - 1 - STALL_WINDOW] - e <= 1e-13 * (1.0 + e.abs()) {
            stalled = true;
            break;
        }
        let (g_new, gnorm_new) = problem.residual(&u)?;
        // Δu = −step·g, so ⟨Δu, Δu⟩/⟨Δu, Δg⟩ = step ‖g‖² / ⟨g, g − g_new⟩
        let dg: Vec<f64> = g.iter().zip(g_new.iter()).map(|(a, b)| a - b).collect();
        let curv = ops.h1_inner(&g, &dg)?;
        step = if curv > 0.0 { step * gnorm * gnorm / curv } else { 2.0 * step };
        g = g_new;
        gnorm = gnorm_new;
    }
    if !converged {
        converged = gnorm <= opts.grad_tol * (1.0 + e.abs());
    }
    let mut polish_iterations = None;
    if (converged || stalled) && gnorm > opts.accept_tol {
        let nopts = NewtonOptions { accept_tol: opts.accept_tol, max_iter: 20, ..NewtonOptions::default() };
        if let Some((v, res, its)) = polish(problem, &u, &nopts)? {
            let ev = problem.energy(&v)?.total;
            // stay on the same critical point: no energy gain beyond roundoff, tiny move
            if ev <= e + 1e-10 * (1.0 + e.abs()) && ops.h1_distance(&u, &v)? <= nopts.distinct_tol {
                u = v;
                gnorm = res;
                polish_iterations = Some(its);
            }
        }
    }
    converged = (converged || stalled) && gnorm <= opts.accept_tol;
    Ok(DescentOutcome {
        point: CriticalPoint {
            energies: problem.energy(&u)?,
            u,
            residual_norm: gnorm,
            iterations,
            origin: Origin::EnergyMin,
        },
        converged,
        energy_trace: trace,
        polish_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, build_interval_mesh};
    use crate::model::{bump, sine, KirchhoffLaw};

    #[test]
    fn coercive_energy_goes_to_zero() {
        let ops = assemble(&build_interval_mesh(16, 1.0).unwrap()).unwrap();
        let law = KirchhoffLaw::affine(1.0, 1.0);
        let f = bump();
        let p = Problem::new(&ops, &law, &f);
        let u0: Vec<f64> = (0..15).map(|i| 0.3 * (i as f64).cos()).collect();
        let out = minimize_energy(&p, &u0, &DescentOptions::default()).unwrap();
        assert!(out.converged);
        assert!(out.point.energies.norm < 1e-8);
    }

    #[test]
    fn trace_is_nonincreasing() {
        let ops = assemble(&build_interval_mesh(16, 1.0).unwrap()).unwrap();
        let law = KirchhoffLaw::affine(1.0, 0.5);
        let f = sine();
        let p = Problem::new(&ops, &law, &f).with_params(15.0, 0.0);
        let u0 = ops.mesh().interpolate(|x| 2.0 * (std::f64::consts::PI * x[0]).sin());
        let out = minimize_energy(&p, &u0, &DescentOptions::default()).unwrap();
        assert!(out.energy_trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(out.converged);
        assert!(out.point.residual_norm <= 1e-8);
    }
}

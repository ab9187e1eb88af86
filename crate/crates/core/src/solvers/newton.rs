//! Damped Newton with multiplicative deflation.
//!
//! Deflation multiplies `G` by `m(u) = Π_k (1/‖u − u_k‖²_A + 1)`. If `δ` is the
//! undeflated Newton step, the Newton step of `m G` is `δ / (1 − ∇log m · δ)`,
//! so only one linear solve per iteration is needed.

use serde::{Deserialize, Serialize};

use super::{sort_points, CriticalPoint, Origin, SolutionSet};
use crate::error::{Error, Result};
use crate::fem::linalg::{dot, BandLu, CsrMatrix};
use crate::fem::FeFunction;
use crate::variational::Problem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonOptions {
    /// Absolute tolerance on `‖R(u)‖_A`.
    pub accept_tol: f64,
    pub max_iter: usize,
    /// Smallest damping factor tried before a start is abandoned.
    pub damping_floor: f64,
    /// Two points closer than this in H¹₀ count as one solution.
    pub distinct_tol: f64,
    /// How many times one start is re-run after it produced a new solution.
    pub max_reseeds: usize,
    /// Iterates beyond this norm are treated as divergent.
    pub blowup_norm: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            accept_tol: 1e-8,
            max_iter: 100,
            damping_floor: 2f64.powi(-20),
            distinct_tol: 1e-3,
            max_reseeds: 8,
            blowup_norm: 1e8,
        }
    }
}

impl NewtonOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("accept_tol", self.accept_tol),
            ("damping_floor", self.damping_floor),
            ("distinct_tol", self.distinct_tol),
            ("blowup_norm", self.blowup_norm),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("solver.{name} must be positive, got {v}")));
            }
        }
        if self.damping_floor >= 1.0 {
            return Err(Error::Config("solver.damping_floor must be below 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("solver.max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// A start that ended without a new solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbandonedStart {
    pub start: usize,
    pub reason: String,
    pub iterations: usize,
    pub residual_norm: f64,
}

enum RunOutcome {
    Converged(FeFunction, f64, usize),
    Abandoned(String, usize, f64),
}

/// Run deflated Newton from every start in order, re-running a start after each
/// success so that deflation can push it toward another root.
pub fn newton_deflated(problem: &Problem<'_>, starts: &[FeFunction], opts: &NewtonOptions) -> Result<SolutionSet> {
    newton_deflated_excluding(problem, starts, &[], opts)
}

/// [`newton_deflated`] with `known` roots deflated from the outset. They count for
/// distinctness but are not part of the returned set.
pub fn newton_deflated_excluding(
    problem: &Problem<'_>,
    starts: &[FeFunction],
    known: &[FeFunction],
    opts: &NewtonOptions,
) -> Result<SolutionSet> {
    opts.validate()?;
    let ops = problem.ops;
    let n = problem.dofs();
    for s in starts.iter().chain(known) {
        ops.check_len(s)?;
    }
    let mut found: Vec<CriticalPoint> = Vec::new();
    let mut abandoned = Vec::new();

    let zero = FeFunction::zeros(n);
    let (_, r0) = problem.residual(&zero)?;
    let zero_known = known.iter().any(|k| ops.h1_norm(k).is_ok_and(|d| d <= opts.distinct_tol));
    if r0 <= opts.accept_tol && !zero_known {
        found.push(CriticalPoint {
            energies: problem.energy(&zero)?,
            u: zero,
            residual_norm: r0,
            iterations: 0,
            origin: Origin::Newton,
        });
    }

    for (idx, start) in starts.iter().enumerate() {
        for _ in 0..=opts.max_reseeds {
            let deflated: Vec<&[f64]> = known.iter().map(|k| &k[..]).chain(found.iter().map(|p| &p.u[..])).collect();
            match run(problem, start, &deflated, opts)? {
                RunOutcome::Converged(u, res, iters) => {
                    let mut closest = f64::INFINITY;
                    for d in &deflated {
                        closest = closest.min(ops.h1_distance(&u, d)?);
                    }
                    if closest <= opts.distinct_tol {
                        abandoned.push(AbandonedStart {
                            start: idx,
                            reason: format!("converged to a known solution (distance {closest:.3e})"),
                            iterations: iters,
                            residual_norm: res,
                        });
                        break;
                    }
                    found.push(CriticalPoint {
                        energies: problem.energy(&u)?,
                        u,
                        residual_norm: res,
                        iterations: iters,
                        origin: Origin::Newton,
                    });
                }
                RunOutcome::Abandoned(reason, iters, res) => {
                    abandoned.push(AbandonedStart { start: idx, reason, iterations: iters, residual_norm: res });
                    break;
                }
            }
        }
    }

    sort_points(&mut found);
    let max_norm = found.iter().map(|p| p.energies.norm).fold(0.0, f64::max);
    Ok(SolutionSet {
        points: found,
        distinct_tol: opts.distinct_tol,
        max_norm,
        accept_tol: opts.accept_tol,
        abandoned,
        starts_tried: starts.len(),
    })
}

/// Plain damped Newton without deflation; `Some((u, residual, iterations))` on convergence.
pub(crate) fn polish(problem: &Problem<'_>, start: &[f64], opts: &NewtonOptions) -> Result<Option<(FeFunction, f64, usize)>> {
    Ok(match run(problem, start, &[], opts)? {
        RunOutcome::Converged(u, res, it) => Some((u, res, it)),
        RunOutcome::Abandoned(..) => None,
    })
}

fn run(problem: &Problem<'_>, start: &[f64], known: &[&[f64]], opts: &NewtonOptions) -> Result<RunOutcome> {
    let ops = problem.ops;
    let a = ops.stiffness();
    let mut u = start.to_vec();
    let mut g = problem.system(&u)?;
    let mut res = ops.dual_norm(&g)?;
    for it in 0..opts.max_iter {
        if !res.is_finite() {
            return Ok(RunOutcome::Abandoned("non-finite residual".into(), it, res));
        }
        if res <= opts.accept_tol {
            return Ok(RunOutcome::Converged(FeFunction::new(u), res, it));
        }
        let Some(delta) = newton_step(problem, &u, &g)? else {
            return Ok(RunOutcome::Abandoned("singular Jacobian".into(), it, res));
        };

        let step = if known.is_empty() {
            delta
        } else {
            let (_, grad_log) = deflation(a, &u, known);
            let denom = 1.0 - dot(&grad_log, &delta);
            if !denom.is_finite() || denom.abs() < 1e-14 {
                return Ok(RunOutcome::Abandoned("deflated step undefined".into(), it, res));
            }
            delta.iter().map(|d| d / denom).collect()
        };

        let merit = deflation(a, &u, known).0 * res;
        let mut s = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(x, d)| x + s * d).collect();
            let gt = problem.system(&trial)?;
            let rt = ops.dual_norm(&gt)?;
            let mt = deflation(a, &trial, known).0 * rt;
            if mt.is_finite() && mt < (1.0 - 1e-4 * s) * merit {
                u = trial;
                g = gt;
                res = rt;
                break;
            }
            s *= 0.5;
            if s < opts.damping_floor {
                return Ok(RunOutcome::Abandoned("damping floor reached".into(), it + 1, res));
            }
        }
        if ops.h1_norm(&u)? > opts.blowup_norm {
            return Ok(RunOutcome::Abandoned("iterate norm blew up".into(), it + 1, res));
        }
    }
    if res <= opts.accept_tol {
        return Ok(RunOutcome::Converged(FeFunction::new(u), res, opts.max_iter));
    }
    Ok(RunOutcome::Abandoned(format!("no convergence within {} iterations", opts.max_iter), opts.max_iter, res))
}

/// Newton step `δ = −DG(u)⁻¹ G(u)` with the nonlocal rank-one term handled by
/// Sherman-Morrison. `None` when the Jacobian is numerically singular.
fn newton_step(problem: &Problem<'_>, u: &[f64], g: &[f64]) -> Result<Option<Vec<f64>>> {
    let ops = problem.ops;
    let a = ops.stiffness();
    let au = a.mul_vec(u);
    let t = dot(u, &au).max(0.0);
    let k = problem.law.k(t);
    let c = 2.0 * problem.law.dk(t);

    let mut j0 = a.scaled(k);
    if problem.lambda != 0.0 {
        let f = problem.f;
        let w = ops.weighted_mass(u, |x, s| Ok(f.dfdt(x, s)))?;
        j0 = j0.linear_combination(1.0, &w, -problem.lambda);
    }
    if let (Some(gn), true) = (problem.g, problem.mu != 0.0) {
        let w = ops.weighted_mass(u, |x, s| Ok(gn.dfdt(x, s)))?;
        j0 = j0.linear_combination(1.0, &w, -problem.mu);
    }
    let lu = match BandLu::factor(&j0) {
        Ok(lu) => lu,
        Err(Error::LinearSolve(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let y = lu.solve(g);
    let step = if c != 0.0 {
        let z = lu.solve(&au);
        let denom = 1.0 + c * dot(&au, &z);
        if !denom.is_finite() || denom.abs() < 1e-14 {
            return Ok(None);
        }
        let coef = c * dot(&au, &y) / denom;
        y.iter().zip(&z).map(|(yi, zi)| -(yi - coef * zi)).collect::<Vec<_>>()
    } else {
        y.iter().map(|v| -v).collect()
    };
    if step.iter().all(|v| v.is_finite()) {
        Ok(Some(step))
    } else {
        Ok(None)
    }
}

/// `(m(u), ∇log m(u))` for the known roots.
fn deflation(a: &CsrMatrix, u: &[f64], known: &[&[f64]]) -> (f64, Vec<f64>) {
    let mut m = 1.0;
    let mut grad = vec![0.0; u.len()];
    for k in known {
        let diff: Vec<f64> = u.iter().zip(k.iter()).map(|(x, y)| x - y).collect();
        let ad = a.mul_vec(&diff);
        let d = dot(&diff, &ad);
        m *= 1.0 / d + 1.0;
        let w = -2.0 / (d * (1.0 + d));
        grad.iter_mut().zip(&ad).for_each(|(gi, adi)| *gi += w * adi);
    }
    (m, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, build_interval_mesh};
    use crate::model::{bump, sine_forcing, KirchhoffLaw};
    use std::f64::consts::PI;

    #[test]
    fn only_zero_without_forcing() {
        let ops = assemble(&build_interval_mesh(16, 1.0).unwrap()).unwrap();
        let law = KirchhoffLaw::affine(1.0, 1.0);
        let f = bump();
        let p = Problem::new(&ops, &law, &f);
        let starts: Vec<FeFunction> =
            [0.5, 2.0, -3.0].iter().map(|a| FeFunction::new(ops.mesh().interpolate(|x| a * (PI * x[0]).sin()))).collect();
        let set = newton_deflated(&p, &starts, &NewtonOptions::default()).unwrap();
        assert_eq!(set.len(), 1);
        assert!(set.points[0].u.is_zero());
    }

    #[test]
    fn linear_forcing_one_step() {
        let ops = assemble(&build_interval_mesh(32, 1.0).unwrap()).unwrap();
        let law = KirchhoffLaw::constant(1.0);
        let f = sine_forcing();
        let p = Problem::new(&ops, &law, &f).with_params(1.0, 0.0);
        let set = newton_deflated(&p, &[FeFunction::zeros(31)], &NewtonOptions::default()).unwrap();
        assert_eq!(set.len(), 1);
        let exact = ops.mesh().interpolate(|x| (PI * x[0]).sin() / (PI * PI));
        let err = set.points[0].u.iter().zip(&exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-4, "{err}");
        assert!(set.points[0].iterations <= 2);
    }

    #[test]
    fn sherman_morrison_matches_dense_jacobian() {
        // compare the step with a finite-difference Jacobian solved densely
        let ops = assemble(&build_interval_mesh(6, 1.0).unwrap()).unwrap();
        let law = KirchhoffLaw::affine(1.0, 2.0);
        let f = bump();
        let p = Problem::new(&ops, &law, &f).with_params(30.0, 0.0);
        let u = vec![0.4, 1.2, 1.6, 1.5, 0.9];
        let g = p.system(&u).unwrap();
        let step = newton_step(&p, &u, &g).unwrap().unwrap();
        let n = u.len();
        let h = 1e-6;
        let mut jac = nalgebra::DMatrix::zeros(n, n);
        for j in 0..n {
            let mut up = u.clone();
            let mut um = u.clone();
            up[j] += h;
            um[j] -= h;
            let gp = p.system(&up).unwrap();
            let gm = p.system(&um).unwrap();
            for i in 0..n {
                jac[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let rhs = nalgebra::DVector::from_iterator(n, g.iter().map(|v| -v));
        let dense = jac.lu().solve(&rhs).unwrap();
        for i in 0..n {
            assert!((dense[i] - step[i]).abs() < 1e-5 * (1.0 + dense[i].abs()), "{i}: {} vs {}", dense[i], step[i]);
        }
    }

    #[test]
    fn deflation_gradient_matches_fd() {
        let ops = assemble(&build_interval_mesh(5, 1.0).unwrap()).unwrap();
        let a = ops.stiffness();
        let k1 = vec![0.1, 0.2, 0.0, -0.1];
        let k2 = vec![1.0, 0.5, 0.3, 0.2];
        let known: Vec<&[f64]> = vec![&k1, &k2];
        let u = vec![0.3, -0.2, 0.4, 0.1];
        let (_, grad) = deflation(a, &u, &known);
        for i in 0..4 {
            let mut up = u.clone();
            let mut um = u.clone();
            up[i] += 1e-6;
            um[i] -= 1e-6;
            let fd = (deflation(a, &up, &known).0.ln() - deflation(a, &um, &known).0.ln()) / 2e-6;
            assert!((fd - grad[i]).abs() < 1e-6 * (1.0 + fd.abs()));
        }
    }
}

//! Upper estimate of the threshold `θ* = inf K̃(‖u‖²) / (2∫F(x,u))` over `J(u) > 0`.
//!
//! The estimate is the running minimum of every ratio evaluated, so it is an
//! upper bound for the discrete infimum by construction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dirichlet_eigenpairs;
use super::starts::peak_normalized;
use crate::error::{Error, Result};
use crate::fem::{AssembledOperators, FeFunction};
use crate::model::{log_grid, probe_profiles, KirchhoffLaw, Nonlinearity};
use crate::variational::{grad_j, grad_phi, j_functional, phi};

const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaOptions {
    pub eigen_directions: usize,
    pub random_directions: usize,
    pub include_probes: bool,
    /// Amplitude range of the line scans.
    pub t_range: [f64; 2],
    pub per_decade: usize,
    pub golden_iters: usize,
    /// Number of best directions passed to the gradient polish.
    pub polish_candidates: usize,
    pub polish_iters: usize,
    /// Keep the full scan curves in the diagnostics.
    pub keep_scans: bool,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        ThetaOptions {
            eigen_directions: 5,
            random_directions: 8,
            include_probes: true,
            t_range: [1e-3, 1e3],
            per_decade: 20,
            golden_iters: 60,
            polish_candidates: 3,
            polish_iters: 300,
            keep_scans: true,
        }
    }
}

impl ThetaOptions {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.t_range;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Config(format!("theta_star.t_range must satisfy 0 < lo < hi, got [{lo}, {hi}]")));
        }
        if self.per_decade == 0 {
            return Err(Error::Config("theta_star.per_decade must be positive".into()));
        }
        if self.eigen_directions + self.random_directions == 0 && !self.include_probes {
            return Err(Error::Config("theta_star needs at least one search direction".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCurve {
    pub direction: String,
    pub t: Vec<f64>,
    /// `None` where `J(t v) ≤ 0`.
    pub ratio: Vec<Option<f64>>,
    pub best_t: Option<f64>,
    pub best_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaDiagnostics {
    pub scans: Vec<ScanCurve>,
    /// Number of search directions.
    pub multistart_count: usize,
    pub feasible_directions: usize,
    /// Ratio evaluations with `J > 0`.
    pub evaluations: usize,
    pub best_scan_ratio: f64,
    pub polish_iterations: usize,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaStarEstimate {
    pub value: f64,
    pub minimizer: FeFunction,
    pub phi: f64,
    pub j: f64,
    pub mesh_id: String,
    pub diagnostics: ThetaDiagnostics,
}

struct Tracker<'a> {
    ops: &'a AssembledOperators,
    law: &'a KirchhoffLaw,
    nl: &'a Nonlinearity,
    best: Option<(f64, FeFunction, f64, f64)>,
    evaluations: usize,
}

impl Tracker<'_> {
    /// `Φ(u)/J(u)` or `None` if `J(u) ≤ 0`.
    fn ratio(&mut self, u: &FeFunction) -> Result<Option<f64>> {
        let j = j_functional(self.ops, self.nl, u)?;
        if !(j > 0.0) {
            return Ok(None);
        }
        let p = phi(self.ops, self.law, u)?;
        let r = p / j;
        if !r.is_finite() {
            return Ok(None);
        }
        self.evaluations += 1;
        if self.best.as_ref().is_none_or(|(b, ..)| r < *b) {
            self.best = Some((r, u.clone(), p, j));
        }
        Ok(Some(r))
    }
}

pub fn estimate_theta_star(
    ops: &AssembledOperators,
    law: &KirchhoffLaw,
    nl: &Nonlinearity,
    opts: &ThetaOptions,
    seed: u64,
) -> Result<ThetaStarEstimate> {
    estimate_theta_star_seeded(ops, law, nl, opts, seed, &[])
}

/// Like [`estimate_theta_star`] with extra search directions, e.g. a coarse
/// minimizer prolonged to this mesh.
pub fn estimate_theta_star_seeded(
    ops: &AssembledOperators,
    law: &KirchhoffLaw,
    nl: &Nonlinearity,
    opts: &ThetaOptions,
    seed: u64,
    extra: &[FeFunction],
) -> Result<ThetaStarEstimate> {
    opts.validate()?;
    let n = ops.num_dofs();
    for e in extra {
        ops.check_len(e)?;
    }

    let eigen = dirichlet_eigenpairs(ops, opts.eigen_directions)?;
    let mut directions: Vec<(String, FeFunction)> = Vec::new();
    for (k, v) in eigen.vectors.iter().enumerate() {
        let unit = peak_normalized(v);
        directions.push((format!("eigen-{k}+"), unit.clone()));
        directions.push((format!("eigen-{k}-"), unit.scaled(-1.0)));
    }
    if opts.include_probes {
        for p in probe_profiles(ops.mesh()) {
            directions.push((format!("{}+", p.name), p.values.clone()));
            directions.push((format!("{}-", p.name), p.values.scaled(-1.0)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..opts.random_directions {
        let raw: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        directions.push((format!("random-{k}"), peak_normalized(&raw)));
    }
    for (k, e) in extra.iter().enumerate() {
        directions.push((format!("seed-{k}"), peak_normalized(e)));
    }

    let mut tr = Tracker { ops, law, nl, best: None, evaluations: 0 };
    let grid = log_grid(opts.t_range[0], opts.t_range[1], opts.per_decade);
    let mut scans = Vec::new();
    let mut candidates: Vec<(f64, FeFunction)> = Vec::new();

    for (name, v) in &directions {
        let mut ratios = Vec::with_capacity(grid.len());
        for &t in &grid {
            ratios.push(tr.ratio(&v.scaled(t))?);
        }
        let best_idx = ratios
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.map(|r| (i, r)))
            .fold(None, |acc: Option<(usize, f64)>, (i, r)| match acc {
                Some((_, b)) if b <= r => acc,
                _ => Some((i, r)),
            });
        let mut curve = ScanCurve { direction: name.clone(), t: grid.clone(), ratio: ratios, best_t: None, best_ratio: None };
        if let Some((i, r0)) = best_idx {
            let lo = grid[i.saturating_sub(1)].ln();
            let hi = grid[(i + 1).min(grid.len() - 1)].ln();
            let (t, r) = golden_refine(&mut tr, v, lo, hi, opts.golden_iters, (grid[i], r0))?;
            curve.best_t = Some(t);
            curve.best_ratio = Some(r);
            candidates.push((r, v.scaled(t)));
        }
        if !opts.keep_scans {
            curve.t.clear();
            curve.ratio.clear();
        }
        scans.push(curve);
    }

    if tr.best.is_none() {
        return Err(Error::Feasibility(format!(
            "{} directions scanned on {}",
            directions.len(),
            ops.mesh().id()
        )));
    }
    let best_scan_ratio = tr.best.as_ref().map(|b| b.0).unwrap();
    let feasible_directions = candidates.len();

    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut polish_iterations = 0;
    for (r, u) in candidates.into_iter().take(opts.polish_candidates) {
        polish_iterations += polish(&mut tr, u, r, opts.polish_iters)?;
    }

    let (value, minimizer, p, j) = tr.best.take().unwrap();
    Ok(ThetaStarEstimate {
        value,
        minimizer,
        phi: p,
        j,
        mesh_id: ops.mesh().id(),
        diagnostics: ThetaDiagnostics {
            scans,
            multistart_count: directions.len(),
            feasible_directions,
            evaluations: tr.evaluations,
            best_scan_ratio,
            polish_iterations,
            eigenvalues: eigen.values,
        },
    })
}

/// Golden-section search of `t ↦ ratio(e^s v)` for `s ∈ [lo, hi]`.
fn golden_refine(
    tr: &mut Tracker<'_>,
    v: &FeFunction,
    mut lo: f64,
    mut hi: f64,
    iters: usize,
    grid_best: (f64, f64),
) -> Result<(f64, f64)> {
    let eval = |tr: &mut Tracker<'_>, s: f64| -> Result<f64> { Ok(tr.ratio(&v.scaled(s.exp()))?.unwrap_or(f64::INFINITY)) };
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = eval(tr, x1)?;
    let mut f2 = eval(tr, x2)?;
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = eval(tr, x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = eval(tr, x2)?;
        }
    }
    let (s, f) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if f < grid_best.1 {
        Ok((s.exp(), f))
    } else {
        Ok(grid_best)
    }
}

/// Normalized gradient descent on the ratio `ρ = Φ/J` with Riesz gradient
/// `(Φ′ − ρ J′)/J`. Steps are relative to `‖u‖`, which keeps the path
/// unchanged when `f` is rescaled.
fn polish(tr: &mut Tracker<'_>, mut u: FeFunction, mut r: f64, iters: usize) -> Result<usize> {
    let ops = tr.ops;
    let mut s = 0.1;
    for it in 0..iters {
        let j = j_functional(ops, tr.nl, &u)?;
        let gp = grad_phi(ops, tr.law, &u)?;
        let gj = grad_j(ops, tr.nl, &u)?;
        let g: Vec<f64> = gp.iter().zip(gj.iter()).map(|(a, b)| (a - r * b) / j).collect();
        let gn = ops.h1_norm(&g)?;
        let un = ops.h1_norm(&u)?;
        if !(gn > 0.0) || gn * un <= 1e-12 * r {
            return Ok(it);
        }
        loop {
            let trial = u.plus_scaled(-s * un / gn, &g);
            match tr.ratio(&trial)? {
                Some(rt) if rt < r - 1e-4 * s * un * gn => {
                    u = trial;
                    r = rt;
                    s = (2.0 * s).min(1.0);
                    break;
                }
                _ => {
                    s *= 0.5;
                    if s < 1e-14 {
                        return Ok(it);
                    }
                }
            }
        }
    }
    Ok(iters)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleInvarianceReport {
    pub c: f64,
    pub base: f64,
    pub scaled: f64,
    pub expected: f64,
    pub relative_error: f64,
    pub passed: bool,
}

/// Re-estimate with `c·f` and compare with `θ*(f)/c`; tolerance `1e-6` relative.
pub fn scale_invariance_check(
    ops: &AssembledOperators,
    law: &KirchhoffLaw,
    nl: &Nonlinearity,
    c: f64,
    opts: &ThetaOptions,
    seed: u64,
) -> Result<ScaleInvarianceReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("scale factor must be positive, got {c}")));
    }
    let base = estimate_theta_star(ops, law, nl, opts, seed)?.value;
    let scaled = estimate_theta_star(ops, law, &nl.scaled(c), opts, seed)?.value;
    let expected = base / c;
    let relative_error = (scaled - expected).abs() / expected.abs();
    Ok(ScaleInvarianceReport { c, base, scaled, expected, relative_error, passed: relative_error <= 1e-6 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, build_interval_mesh};
    use crate::model::{bump, linear, zero};
    use std::f64::consts::PI;

    fn quick() -> ThetaOptions {
        ThetaOptions { per_decade: 10, golden_iters: 40, polish_iters: 50, ..ThetaOptions::default() }
    }

    #[test]
    fn linear_gives_first_eigenvalue() {
        let ops = assemble(&build_interval_mesh(64, 1.0).unwrap()).unwrap();
        let est = estimate_theta_star(&ops, &KirchhoffLaw::constant(1.0), &linear(), &quick(), 1).unwrap();
        assert!((est.value / (PI * PI) - 1.0).abs() < 1e-3, "{}", est.value);
        assert!((est.phi / est.j - est.value).abs() <= 1e-12 * est.value);
    }

    #[test]
    fn running_minimum_bounds_scans() {
        let ops = assemble(&build_interval_mesh(32, 1.0).unwrap()).unwrap();
        let est = estimate_theta_star(&ops, &KirchhoffLaw::affine(1.0, 1.0), &bump(), &quick(), 3).unwrap();
        for c in &est.diagnostics.scans {
            for r in c.ratio.iter().flatten() {
                assert!(*r >= est.value);
            }
        }
        assert!(j_functional(&ops, &bump(), &est.minimizer).unwrap() > 0.0);
        assert!(est.value <= est.diagnostics.best_scan_ratio);
    }

    #[test]
    fn infeasible_is_an_error() {
        let ops = assemble(&build_interval_mesh(8, 1.0).unwrap()).unwrap();
        let err = estimate_theta_star(&ops, &KirchhoffLaw::constant(1.0), &zero(), &quick(), 0).unwrap_err();
        assert!(matches!(err, Error::Feasibility(_)));
    }

    #[test]
    fn scaling_linear() {
        let ops = assemble(&build_interval_mesh(32, 1.0).unwrap()).unwrap();
        let rep = scale_invariance_check(&ops, &KirchhoffLaw::constant(1.0), &linear(), 2.0, &quick(), 5).unwrap();
        assert!(rep.passed, "{rep:?}");
    }
}

//! Sampling audit of the structural conditions on `K` and `f`.
//!
//! Limits cannot be decided from samples, so every condition gets a
//! three-valued status with the numbers that led to it. A `Fail` always
//! carries a concrete witness.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{AssembledOperators, FeFunction, Mesh, MeshShape, Point};
use crate::model::{log_grid, KirchhoffLaw, Nonlinearity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Abscissa of the offending sample (`t`, `s` or exponent, see `note`).
    pub at: f64,
    pub value: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    status: Status,
    summary: String,
    witness: Option<Witness>,
    evidence: BTreeMap<String, f64>,
}

impl ConditionResult {
    fn pass(summary: impl Into<String>) -> Self {
        ConditionResult { status: Status::Pass, summary: summary.into(), witness: None, evidence: BTreeMap::new() }
    }

    fn inconclusive(summary: impl Into<String>) -> Self {
        ConditionResult { status: Status::Inconclusive, ..ConditionResult::pass(summary) }
    }

    fn fail(summary: impl Into<String>, witness: Witness) -> Self {
        ConditionResult { status: Status::Fail, witness: Some(witness), ..ConditionResult::pass(summary) }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.evidence.insert(key.to_string(), value);
        self
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn summary(&self) -> &str {
        &self.summary
    }

    pub fn witness(&self) -> Option<&Witness> {
        self.witness.as_ref()
    }

    pub fn evidence(&self) -> &BTreeMap<String, f64> {
        &self.evidence
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    /// Density of every log-spaced grid.
    pub points_per_decade: usize,
    /// Threshold above which a sampled quantity counts as positive.
    pub positive_tol: f64,
    /// Upper end of the `[0, k_max]` grid for `inf K`.
    pub k_max: f64,
    /// Range used to fit the growth of `K̃`.
    pub tail_range: [f64; 2],
    /// Allowed shortfall of the fitted log-slope of `K̃` below `α`.
    pub slope_tol: f64,
    /// `|t|` range approaching 0 for the small-amplitude condition.
    pub small_range: [f64; 2],
    /// `|t|` range for the large-amplitude condition.
    pub large_range: [f64; 2],
    /// Density of the grids used for the left inverse `h` (each point costs a root solve).
    pub h_points_per_decade: usize,
    /// Density of the amplitude scan for the positivity probes.
    pub amplitude_per_decade: usize,
    /// Cap on the number of spatial samples for `sup_x`.
    pub max_x_samples: usize,
    /// Dimension `n` of the intended domain when it differs from the mesh (enables the
    /// `α ≥ n/(n-2)` shortcut for `n ≥ 3`).
    pub dimension_meta: Option<usize>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            points_per_decade: 200,
            positive_tol: 1e-9,
            k_max: 1e6,
            tail_range: [1e2, 1e6],
            slope_tol: 0.05,
            small_range: [1e-8, 1e-1],
            large_range: [1e1, 1e8],
            h_points_per_decade: 10,
            amplitude_per_decade: 10,
            max_x_samples: 400,
            dimension_meta: None,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        let ranges = [self.tail_range, self.small_range, self.large_range];
        if self.points_per_decade == 0 || self.h_points_per_decade == 0 || self.amplitude_per_decade == 0 {
            return Err(Error::Config("sampling densities must be positive".into()));
        }
        if !(self.positive_tol > 0.0) || !(self.k_max > 0.0) || !(self.slope_tol >= 0.0) {
            return Err(Error::Config("sampling tolerances must be positive".into()));
        }
        if ranges.iter().any(|r| !(r[0] > 0.0 && r[1] > r[0])) {
            return Err(Error::Config("sampling ranges must satisfy 0 < lo < hi".into()));
        }
        if self.max_x_samples == 0 {
            return Err(Error::Config("max_x_samples must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// Some `u` with `∫ F(x, u) > 0`.
    pub a1: ConditionResult,
    /// `inf K > 0`.
    pub a2: ConditionResult,
    /// `liminf K̃(t)/t^α > 0`.
    pub a3: ConditionResult,
    /// Continuous `h` with `h(t K(t²)) = t`.
    pub a4: ConditionResult,
    /// `limsup_{t→0} sup_x F(x,t)/t² ≤ 0`.
    pub a5: ConditionResult,
    /// `limsup_{|t|→∞} sup_x F(x,t)/|t|^{2α} ≤ 0`.
    pub a6: ConditionResult,
    /// Subcritical growth of `f`.
    pub growth: ConditionResult,
    /// Sampled `γ = inf K`.
    pub gamma: f64,
    /// Sampled `min K̃(t)/t^α` over the tail range.
    pub tail_ratio: f64,
    /// Least-squares slope of `log K̃` against `log t` over the tail range.
    pub tail_slope: f64,
    /// `K(0) > 0` and `K` nondecreasing on the sample grid.
    pub monotone_sufficient: bool,
    /// `(a6)` decided by `α ≥ n/(n-2)` rather than sampling.
    pub large_amplitude_shortcut: bool,
}

impl HypothesisReport {
    pub fn conditions(&self) -> [(&'static str, &ConditionResult); 7] {
        [
            ("a1", &self.a1),
            ("a2", &self.a2),
            ("a3", &self.a3),
            ("a4", &self.a4),
            ("a5", &self.a5),
            ("a6", &self.a6),
            ("growth", &self.growth),
        ]
    }

    pub fn any_fail(&self) -> bool {
        self.conditions().iter().any(|(_, c)| c.status == Status::Fail)
    }

    pub fn all_pass(&self) -> bool {
        self.conditions().iter().all(|(_, c)| c.status == Status::Pass)
    }
}

/// A named shape with peak value 1, used as a positivity probe and as a search direction.
#[derive(Debug, Clone)]
pub struct ProbeProfile {
    pub name: String,
    pub values: FeFunction,
}

/// Plateau (trapezoid) profiles of several ramp widths plus a sine hump; tensor
/// products of the same on rectangles.
pub fn probe_profiles(mesh: &Mesh) -> Vec<ProbeProfile> {
    const RAMPS: [f64; 8] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5];
    fn plateau(s: f64, ramp: f64) -> f64 {
        (s.min(1.0 - s) / ramp).clamp(0.0, 1.0)
    }
    let [lx, ly] = mesh.extent();
    let unit = |p: Point| (p[0] / lx, if ly > 0.0 { p[1] / ly } else { 0.5 });
    let two_d = matches!(mesh.shape(), MeshShape::Rectangle { .. });
    let mut out: Vec<ProbeProfile> = RAMPS
        .iter()
        .map(|&w| {
            let values = mesh.interpolate(|p| {
                let (s, r) = unit(p);
                if two_d {
                    plateau(s, w) * plateau(r, w)
                } else {
                    plateau(s, w)
                }
            });
            ProbeProfile { name: format!("plateau-{w:.2}"), values: values.into() }
        })
        .collect();
    let sine = mesh.interpolate(|p| {
        let (s, r) = unit(p);
        if two_d {
            (PI * s).sin() * (PI * r).sin()
        } else {
            (PI * s).sin()
        }
    });
    out.push(ProbeProfile { name: "sine".into(), values: sine.into() });
    for p in &mut out {
        let m = p.values.max_abs();
        if m > 0.0 {
            p.values = p.values.scaled(1.0 / m);
        }
    }
    out
}

/// Audit the conditions on `(law, nl)` over the domain meshed in `ops`.
pub fn check_hypotheses(
    law: &KirchhoffLaw,
    nl: &Nonlinearity,
    ops: &AssembledOperators,
    cfg: &SamplingConfig,
) -> Result<HypothesisReport> {
    cfg.validate()?;
    let xs = spatial_samples(ops, nl, cfg.max_x_samples);
    let a1 = check_positive_probe(nl, ops, cfg).map_err(|e| e.context("positivity probes"))?;
    let (a2, gamma) = check_inf_k(law, cfg);
    let (a3, tail_ratio, tail_slope) = check_growth_of_primitive(law, cfg).map_err(|e| e.context("K̃ tail"))?;
    let (a4, monotone_sufficient) = check_left_inverse(law, cfg);
    let a5 = check_small_amplitude(nl, &xs, cfg).map_err(|e| e.context("F near 0"))?;
    let n = cfg.dimension_meta.unwrap_or(ops.mesh().dimension());
    let alpha = law.alpha();
    let shortcut = n >= 3 && alpha >= n as f64 / (n as f64 - 2.0);
    let a6 = if shortcut {
        ConditionResult::pass(format!("automatic: n = {n} and α = {alpha} ≥ n/(n-2)"))
            .with("n", n as f64)
            .with("alpha", alpha)
    } else {
        check_large_amplitude(nl, alpha, &xs, cfg).map_err(|e| e.context("F at infinity"))?
    };
    let growth = check_growth_class(nl, n, &xs, cfg);
    Ok(HypothesisReport {
        a1,
        a2,
        a3,
        a4,
        a5,
        a6,
        growth,
        gamma,
        tail_ratio,
        tail_slope,
        monotone_sufficient,
        large_amplitude_shortcut: shortcut,
    })
}

fn spatial_samples(ops: &AssembledOperators, nl: &Nonlinearity, cap: usize) -> Vec<Point> {
    let mut pts: Vec<Point> = ops.elements().iter().flat_map(|e| e.points.iter().copied()).collect();
    if !nl.is_x_dependent() {
        pts.truncate(1);
        return pts;
    }
    let stride = pts.len().div_ceil(cap).max(1);
    pts.into_iter().step_by(stride).collect()
}

fn check_positive_probe(nl: &Nonlinearity, ops: &AssembledOperators, cfg: &SamplingConfig) -> Result<ConditionResult> {
    let amps = log_grid(1e-3, 1e3, cfg.amplitude_per_decade);
    let profiles = probe_profiles(ops.mesh());
    let mut best = (f64::NEG_INFINITY, 0.0, 0usize);
    for (k, prof) in profiles.iter().enumerate() {
        for &a in &amps {
            for sign in [1.0, -1.0] {
                let u = prof.values.scaled(sign * a);
                let j = ops.integrate_composed(&u, |x, t| nl.primitive(x, t))?;
                if j > best.0 {
                    best = (j, sign * a, k);
                }
            }
        }
    }
    let (j, amp, k) = best;
    let evidence = |c: ConditionResult| {
        c.with("best_integral", j)
            .with("amplitude", amp)
            .with("profile", k as f64)
            .with("probes", (profiles.len() * amps.len() * 2) as f64)
    };
    Ok(if j > cfg.positive_tol {
        evidence(ConditionResult::pass(format!("∫F(x, u) = {j:e} > 0 for {} × {amp}", profiles[k].name)))
    } else {
        evidence(ConditionResult::inconclusive("no probe gave ∫F(x, u) > 0"))
    })
}

fn check_inf_k(law: &KirchhoffLaw, cfg: &SamplingConfig) -> (ConditionResult, f64) {
    let mut ts = vec![0.0];
    ts.extend(log_grid(1e-6, cfg.k_max, cfg.points_per_decade));
    let ks: Vec<f64> = ts.iter().map(|&t| law.k(t)).collect();
    if let Some(i) = ks.iter().position(|k| !k.is_finite()) {
        let w = Witness { at: ts[i], value: ks[i], note: "K not finite".into() };
        return (ConditionResult::fail("K is not finite on the sample grid", w), f64::NAN);
    }
    let (imin, gamma) = ks.iter().copied().enumerate().fold((0, f64::INFINITY), |m, (i, k)| if k < m.1 { (i, k) } else { m });
    let result = if let Some(i) = ks.iter().position(|&k| k <= cfg.positive_tol) {
        let w = Witness { at: ts[i], value: ks[i], note: "K(t) at or below the positivity tolerance".into() };
        ConditionResult::fail(format!("K({:e}) = {:e}", ts[i], ks[i]), w)
    } else {
        let decade_back = ts.len().saturating_sub(cfg.points_per_decade + 1);
        let still_falling = imin == ts.len() - 1 && ks[ts.len() - 1] < ks[decade_back];
        if still_falling {
            ConditionResult::inconclusive(format!("min K = {gamma:e} at the grid end and still decreasing"))
        } else {
            ConditionResult::pass(format!("sampled inf K = {gamma:e} > 0"))
        }
    };
    (result.with("gamma", gamma).with("argmin", ts[imin]).with("points", ts.len() as f64), gamma)
}

fn check_growth_of_primitive(law: &KirchhoffLaw, cfg: &SamplingConfig) -> Result<(ConditionResult, f64, f64)> {
    let alpha = law.alpha();
    let ts = log_grid(cfg.tail_range[0], cfg.tail_range[1], cfg.points_per_decade);
    let vals: Vec<f64> = ts.iter().map(|&t| law.tilde_k(t)).collect::<Result<_>>()?;
    if let Some(i) = vals.iter().position(|v| !(*v > 0.0)) {
        let w = Witness { at: ts[i], value: vals[i], note: "K̃(t) not positive".into() };
        return Ok((ConditionResult::fail("K̃ is not positive on the tail", w), vals[i] / ts[i].powf(alpha), f64::NAN));
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = ts.iter().zip(&vals).map(|(t, v)| (t.ln(), v.ln())).unzip();
    let slope = least_squares_slope(&lx, &ly);
    let ratios: Vec<f64> = ts.iter().zip(&vals).map(|(t, v)| v / t.powf(alpha)).collect();
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let last = ratios.len() - 1;
    let result = if slope >= alpha - cfg.slope_tol && min_ratio > cfg.positive_tol {
        ConditionResult::pass(format!("log K̃ grows with slope {slope:.4} ≥ α = {alpha}; min K̃/t^α = {min_ratio:e}"))
    } else if slope < alpha - cfg.slope_tol {
        let w = Witness { at: ts[last], value: ratios[last], note: format!("K̃/t^α decaying, fitted slope {slope:.4}") };
        ConditionResult::fail(format!("log K̃ slope {slope:.4} below α = {alpha}"), w)
    } else {
        ConditionResult::inconclusive(format!("slope {slope:.4} but min K̃/t^α = {min_ratio:e}"))
    };
    Ok((result.with("slope", slope).with("alpha", alpha).with("min_ratio", min_ratio), min_ratio, slope))
}

fn check_left_inverse(law: &KirchhoffLaw, cfg: &SamplingConfig) -> (ConditionResult, bool) {
    let ts = log_grid(1e-6, 1e3, cfg.h_points_per_decade);
    let mut k_grid = vec![0.0];
    k_grid.extend(log_grid(1e-6, cfg.k_max, cfg.points_per_decade));
    let k0 = law.k(0.0);
    let nondecreasing = k_grid.windows(2).all(|w| law.k(w[1]) >= law.k(w[0]));
    let sufficient = k0 > 0.0 && nondecreasing;
    let tag = |c: ConditionResult| c.with("k0", k0).with("k_nondecreasing", nondecreasing as u8 as f64);

    // t ↦ t K(t²) must be injective for any left inverse to exist
    let mut prev = (0.0, 0.0);
    for &t in &ts {
        let s = law.forward_h(t);
        if !(s > prev.1) {
            let w = Witness { at: t, value: s, note: format!("t K(t²) not increasing after t = {:e}", prev.0) };
            return (tag(ConditionResult::fail("t K(t²) is not injective", w)), sufficient);
        }
        prev = (t, s);
    }
    if !law.is_monotone() {
        let c = ConditionResult::inconclusive("law does not declare t K(t²) increasing and onto; h not constructed");
        return (tag(c), sufficient);
    }
    for s in log_grid(1e-6, 1e6, cfg.h_points_per_decade) {
        if let Err(e) = law.solve_h(s) {
            let w = Witness { at: s, value: f64::NAN, note: e.to_string() };
            return (tag(ConditionResult::fail(format!("h({s:e}) has no root"), w)), sufficient);
        }
    }
    let mut worst = 0.0f64;
    for &t in &ts {
        let back = match law.solve_h(law.forward_h(t)) {
            Ok(v) => v,
            Err(e) => {
                let w = Witness { at: t, value: f64::NAN, note: e.to_string() };
                return (tag(ConditionResult::fail("h(t K(t²)) failed", w)), sufficient);
            }
        };
        let err = (back - t).abs();
        if err > 1e-9 * (1.0 + t) {
            let w = Witness { at: t, value: back, note: "h(t K(t²)) differs from t".into() };
            return (tag(ConditionResult::fail("left-inverse identity violated", w)), sufficient);
        }
        worst = worst.max(err / (1.0 + t));
    }
    let how = if sufficient { "K nondecreasing with K(0) > 0" } else { "declared monotone" };
    (tag(ConditionResult::pass(format!("h(t K(t²)) = t on the grid ({how})")).with("max_rel_error", worst)), sufficient)
}

fn sup_over(nl: &Nonlinearity, xs: &[Point], t: f64) -> Result<f64> {
    let mut m = f64::NEG_INFINITY;
    for &x in xs {
        m = m.max(nl.primitive(x, t)?);
    }
    Ok(m)
}

fn check_small_amplitude(nl: &Nonlinearity, xs: &[Point], cfg: &SamplingConfig) -> Result<ConditionResult> {
    let mut ts = log_grid(cfg.small_range[0], cfg.small_range[1], cfg.points_per_decade);
    ts.reverse();
    let mut samples = Vec::with_capacity(ts.len());
    for t in ts {
        let v = sup_over(nl, xs, t)?.max(sup_over(nl, xs, -t)?) / (t * t);
        samples.push((t, v));
    }
    Ok(classify_trend(&samples, cfg.positive_tol, "sup F/t² as t → 0"))
}

fn check_large_amplitude(nl: &Nonlinearity, alpha: f64, xs: &[Point], cfg: &SamplingConfig) -> Result<ConditionResult> {
    let ts = log_grid(cfg.large_range[0], cfg.large_range[1], cfg.points_per_decade);
    let mut samples = Vec::with_capacity(ts.len());
    for t in ts {
        let v = sup_over(nl, xs, t)?.max(sup_over(nl, xs, -t)?) / t.powf(2.0 * alpha);
        samples.push((t, v));
    }
    Ok(classify_trend(&samples, cfg.positive_tol, "sup F/|t|^{2α} as |t| → ∞").with("alpha", alpha))
}

/// `samples` are ordered along the approach to the limit.
fn classify_trend(samples: &[(f64, f64)], tol: f64, what: &str) -> ConditionResult {
    let tail = &samples[samples.len() - (samples.len() / 3).max(3).min(samples.len())..];
    let peak = tail.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let (t_last, v_last) = *tail.last().unwrap();
    let c = if tail.iter().any(|s| s.1.is_nan()) {
        ConditionResult::inconclusive(format!("{what}: NaN samples"))
    } else if tail.iter().all(|s| s.1 <= tol) {
        ConditionResult::pass(format!("{what}: tail ≤ {tol:e} (max {peak:e})"))
    } else if v_last > tol && v_last >= 0.5 * peak {
        let w = Witness { at: t_last, value: v_last, note: format!("{what} stays positive") };
        ConditionResult::fail(format!("{what}: positive non-vanishing trend, last {v_last:e}"), w)
    } else {
        ConditionResult::inconclusive(format!("{what}: positive but decaying (last {v_last:e}, peak {peak:e})"))
    };
    c.with("tail_max", peak).with("last", v_last).with("last_t", t_last).with("points", samples.len() as f64)
}

fn check_growth_class(nl: &Nonlinearity, n: usize, xs: &[Point], cfg: &SamplingConfig) -> ConditionResult {
    let q = nl.q();
    if n >= 3 {
        let critical = (n as f64 + 2.0) / (n as f64 - 2.0);
        if !(q > 0.0 && q < critical) {
            let w = Witness { at: q, value: critical, note: "q outside (0, (n+2)/(n-2))".into() };
            return ConditionResult::fail(format!("exponent q = {q} not subcritical for n = {n}"), w);
        }
    }
    if n == 1 {
        let mut sups = Vec::new();
        for r in [1.0, 10.0, 100.0] {
            let mut sup = 0.0f64;
            for i in 0..=2000 {
                let t = -r + 2.0 * r * i as f64 / 2000.0;
                for &x in xs {
                    let v = nl.f(x, t).abs();
                    if !v.is_finite() {
                        let w = Witness { at: t, value: v, note: format!("f not finite for |t| ≤ {r}") };
                        return ConditionResult::fail("sup_{|t|≤r} |f| is not finite", w);
                    }
                    sup = sup.max(v);
                }
            }
            sups.push(sup);
        }
        return ConditionResult::pass("sup_{|t|≤r} |f(x,t)| finite for r = 1, 10, 100")
            .with("sup_r1", sups[0])
            .with("sup_r10", sups[1])
            .with("sup_r100", sups[2]);
    }
    let ts = log_grid(1e-2, 1e6, cfg.points_per_decade);
    let ratio = |t: f64| xs.iter().map(|&x| nl.f(x, t).abs().max(nl.f(x, -t).abs())).fold(0.0, f64::max) / (1.0 + t.powf(q));
    let vals: Vec<f64> = ts.iter().map(|&t| ratio(t)).collect();
    if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
        let w = Witness { at: ts[i], value: vals[i], note: "|f|/(1+|t|^q) not finite".into() };
        return ConditionResult::fail("growth ratio not finite", w);
    }
    let split = vals.len() - cfg.points_per_decade.min(vals.len() - 1);
    let head = vals[..split].iter().copied().fold(0.0, f64::max);
    let tail = vals[split..].iter().copied().fold(0.0, f64::max);
    if tail > 10.0 * head.max(cfg.positive_tol) {
        let w = Witness { at: ts[ts.len() - 1], value: vals[vals.len() - 1], note: "|f|/(1+|t|^q) still growing".into() };
        return ConditionResult::fail(format!("f grows faster than |t|^{q}"), w);
    }
    ConditionResult::pass(format!("sup |f|/(1+|t|^q) = {:e} bounded for q = {q}", head.max(tail))).with("sup_ratio", head.max(tail))
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, build_interval_mesh};
    use crate::model::specimens::{bump, linear};

    fn ops() -> AssembledOperators {
        assemble(&build_interval_mesh(32, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn affine_bump_all_pass() {
        let r = check_hypotheses(&KirchhoffLaw::affine(1.0, 1.0), &bump(), &ops(), &SamplingConfig::default()).unwrap();
        for (name, c) in r.conditions() {
            assert_eq!(c.status(), Status::Pass, "{name}: {}", c.summary());
        }
        assert!(r.gamma >= 1.0);
        assert!((r.tail_slope - 2.0).abs() < 0.05);
        assert!(r.monotone_sufficient);
    }

    #[test]
    fn decaying_law_fails_positivity_with_witness() {
        let r = check_hypotheses(&KirchhoffLaw::exp_decay(), &bump(), &ops(), &SamplingConfig::default()).unwrap();
        assert_eq!(r.a2.status(), Status::Fail);
        let w = r.a2.witness().unwrap();
        assert!(w.value <= 1e-9 && ((-w.at).exp() - w.value).abs() < 1e-20);
        assert_eq!(r.a4.status(), Status::Fail);
    }

    #[test]
    fn linear_f_fails_small_amplitude() {
        let r = check_hypotheses(&KirchhoffLaw::affine(1.0, 1.0), &linear(), &ops(), &SamplingConfig::default()).unwrap();
        assert_eq!(r.a5.status(), Status::Fail);
        assert!((r.a5.witness().unwrap().value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fail_always_has_witness() {
        let r = check_hypotheses(&KirchhoffLaw::exp_decay(), &linear(), &ops(), &SamplingConfig::default()).unwrap();
        for (_, c) in r.conditions() {
            assert_eq!(c.status() == Status::Fail, c.witness().is_some());
        }
    }

    #[test]
    fn shortcut_for_high_dimension_metadata() {
        let cfg = SamplingConfig { dimension_meta: Some(4), ..SamplingConfig::default() };
        let r = check_hypotheses(&KirchhoffLaw::affine(1.0, 1.0), &bump(), &ops(), &cfg).unwrap();
        assert!(r.large_amplitude_shortcut);
        assert_eq!(r.a6.status(), Status::Pass);
        // n = 3 needs α ≥ 3, the affine law only has α = 2
        let cfg3 = SamplingConfig { dimension_meta: Some(3), ..SamplingConfig::default() };
        let r3 = check_hypotheses(&KirchhoffLaw::affine(1.0, 1.0), &bump(), &ops(), &cfg3).unwrap();
        assert!(!r3.large_amplitude_shortcut);
    }

    #[test]
    fn deterministic() {
        let cfg = SamplingConfig::default();
        let a = check_hypotheses(&KirchhoffLaw::affine(1.0, 1.0), &bump(), &ops(), &cfg).unwrap();
        let b = check_hypotheses(&KirchhoffLaw::affine(1.0, 1.0), &bump(), &ops(), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_nonlinearity_has_no_positive_probe() {
        let r = check_hypotheses(&KirchhoffLaw::constant(1.0), &crate::model::specimens::zero(), &ops(), &SamplingConfig::default()).unwrap();
        assert_eq!(r.a1.status(), Status::Inconclusive);
    }
}

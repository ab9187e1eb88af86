//! Helpers shared by the integration suites.
#![allow(dead_code)]

use std::f64::consts::PI;

use kirchhoff::fem::{FeFunction, Mesh, MeshShape};
use kirchhoff::model::Nonlinearity;
use rand::Rng;

/// Smooth field `amp · Σ c_kl sin(kπx/lx) sin(lπy/ly)` with a dominant first mode,
/// so it is positive inside the domain.
pub fn smooth_positive<R: Rng>(mesh: &Mesh, rng: &mut R, amp: f64) -> FeFunction {
    let [lx, ly] = mesh.extent();
    let two_d = matches!(mesh.shape(), MeshShape::Rectangle { .. });
    let modes: Vec<(usize, usize, f64)> = (1..=3)
        .flat_map(|k| (1..=if two_d { 3 } else { 1 }).map(move |l| (k, l)))
        .map(|(k, l)| {
            let c = if k == 1 && l == 1 { 1.0 } else { rng.gen_range(-0.08..0.08) / (k * l) as f64 };
            (k, l, c)
        })
        .collect();
    let values = mesh.interpolate(|p| {
        let mut s = 0.0;
        for &(k, l, c) in &modes {
            let y = if two_d { (l as f64 * PI * p[1] / ly).sin() } else { 1.0 };
            s += c * (k as f64 * PI * p[0] / lx).sin() * y;
        }
        amp * s
    });
    FeFunction::new(values)
}

/// Arbitrary nodal vector with entries in `[-amp, amp]`.
pub fn random_nodal<R: Rng>(n: usize, rng: &mut R, amp: f64) -> FeFunction {
    FeFunction::new((0..n).map(|_| rng.gen_range(-amp..amp)).collect())
}

/// `g(t) = t³` with `G(t) = t⁴/4`, a smooth nonlinearity with nonzero third derivative.
pub fn cubic() -> Nonlinearity {
    Nonlinearity::autonomous("cubic", |t| t * t * t, 3.0)
        .with_primitive(|_, t| 0.25 * t.powi(4))
        .with_dfdt(|_, t| 3.0 * t * t)
}

/// Least-squares slope of `log err` against `log h`.
pub fn observed_order(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Central differences of `e` along `v` at each `h`, compared with `exact`.
/// Returns `(observed order, relative error at the smallest h)`.
pub fn fd_check(
    mut e: impl FnMut(&[f64]) -> f64,
    u: &[f64],
    v: &[f64],
    exact: f64,
    hs: &[f64],
) -> (f64, f64) {
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let up: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + h * b).collect();
            let um: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - h * b).collect();
            ((e(&up) - e(&um)) / (2.0 * h) - exact).abs()
        })
        .collect();
    let rel = errs[errs.len() - 1] / exact.abs();
    (observed_order(hs, &errs), rel)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

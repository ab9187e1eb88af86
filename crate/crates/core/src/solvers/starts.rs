//! Deterministic start library for the multi-solution search.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::EigenPairs;
use crate::error::{Error, Result};
use crate::fem::FeFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StartOptions {
    /// Peak amplitudes of the eigenfunction starts.
    pub amplitudes: Vec<f64>,
    pub eigen_count: usize,
    pub random_count: usize,
    /// Multiples of the threshold minimizer.
    pub theta_scales: Vec<f64>,
}

impl Default for StartOptions {
    fn default() -> Self {
        StartOptions {
            amplitudes: vec![0.5, 1.5, 3.0],
            eigen_count: 5,
            random_count: 12,
            theta_scales: vec![0.5, 1.0, 2.0],
        }
    }
}

impl StartOptions {
    pub fn validate(&self) -> Result<()> {
        if self.amplitudes.is_empty() || self.amplitudes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::Config("starts.amplitudes must be a nonempty list of positive numbers".into()));
        }
        if self.theta_scales.iter().any(|a| !a.is_finite()) {
            return Err(Error::Config("starts.theta_scales must be finite".into()));
        }
        Ok(())
    }
}

/// `0`, then the threshold minimizer scaled, then `±` eigenfunctions at each
/// amplitude, then seeded Gaussian nodal vectors with cycling amplitudes.
pub fn start_library(
    n: usize,
    eigen: &EigenPairs,
    theta_minimizer: Option<&FeFunction>,
    opts: &StartOptions,
    seed: u64,
) -> Vec<FeFunction> {
    let mut out = vec![FeFunction::zeros(n)];
    if let Some(u) = theta_minimizer {
        out.extend(opts.theta_scales.iter().map(|c| u.scaled(*c)));
    }
    for v in eigen.vectors.iter().take(opts.eigen_count) {
        let unit = peak_normalized(v);
        for a in &opts.amplitudes {
            out.push(unit.scaled(*a));
            out.push(unit.scaled(-*a));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..opts.random_count {
        let raw: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let a = opts.amplitudes[i % opts.amplitudes.len()];
        out.push(peak_normalized(&raw).scaled(a));
    }
    out
}

pub(crate) fn peak_normalized(v: &[f64]) -> FeFunction {
    let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let f = FeFunction::new(v.to_vec());
    if m > 0.0 {
        f.scaled(1.0 / m)
    } else {
        f
    }
}

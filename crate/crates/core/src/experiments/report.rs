use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fem::{Mesh, Point};
use crate::solvers::{CriticalPoint, Origin, ThetaDiagnostics, ThetaStarEstimate};
use crate::variational::EnergyBreakdown;

/// One solution with node values on the full mesh (boundary included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub norm: f64,
    pub energies: EnergyBreakdown,
    pub residual_norm: f64,
    pub iterations: usize,
    pub origin: Origin,
    pub values: Vec<f64>,
}

impl SolutionRecord {
    pub fn new(mesh: &Mesh, p: &CriticalPoint) -> Self {
        SolutionRecord {
            norm: p.energies.norm,
            energies: p.energies,
            residual_norm: p.residual_norm,
            iterations: p.iterations,
            origin: p.origin,
            values: mesh.expand(&p.u),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSummary {
    pub value: f64,
    pub phi: f64,
    pub j: f64,
    pub mesh_id: String,
    /// Minimizer on the full mesh.
    pub minimizer: Vec<f64>,
    pub diagnostics: ThetaDiagnostics,
}

impl ThetaSummary {
    pub fn new(mesh: &Mesh, est: &ThetaStarEstimate) -> Self {
        ThetaSummary {
            value: est.value,
            phi: est.phi,
            j: est.j,
            mesh_id: est.mesh_id.clone(),
            minimizer: mesh.expand(&est.minimizer),
            diagnostics: est.diagnostics.clone(),
        }
    }
}

pub(crate) fn node_coords(mesh: &Mesh) -> Vec<Point> {
    mesh.coords().to_vec()
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Seed of the start library for the cell `(λ, μ)`, so that equal cells get equal
/// starts whichever command or grid produced them.
pub fn cell_seed(seed: u64, lambda: f64, mu: f64) -> u64 {
    splitmix(splitmix(seed ^ splitmix(lambda.to_bits())) ^ mu.to_bits())
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_seeds_differ() {
        let a = cell_seed(1, 2.0, 0.0);
        assert_eq!(a, cell_seed(1, 2.0, 0.0));
        assert_ne!(a, cell_seed(2, 2.0, 0.0));
        assert_ne!(a, cell_seed(1, 2.0, 0.5));
        assert_ne!(a, cell_seed(1, 3.0, 0.0));
    }
}

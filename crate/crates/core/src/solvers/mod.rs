//! Multi-solution search, energy descent and the threshold estimator.

mod descent;
mod eigen;
mod fixed_point;
mod newton;
mod starts;
mod theta;

use serde::{Deserialize, Serialize};

use crate::fem::FeFunction;
use crate::variational::EnergyBreakdown;

pub use descent::{minimize_energy, DescentOptions, DescentOutcome};
pub use eigen::{dirichlet_eigenpairs, EigenPairs};
pub use fixed_point::{fixed_point_t, FixedPointOptions, FixedPointOutcome};
pub use newton::{newton_deflated, newton_deflated_excluding, AbandonedStart, NewtonOptions};
pub use starts::{start_library, StartOptions};
pub use theta::{
    estimate_theta_star, estimate_theta_star_seeded, scale_invariance_check, ScaleInvarianceReport, ScanCurve, ThetaDiagnostics, ThetaOptions,
    ThetaStarEstimate,
};

/// Which procedure produced a [`CriticalPoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Newton,
    FixedPoint,
    EnergyMin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub u: FeFunction,
    pub residual_norm: f64,
    pub energies: EnergyBreakdown,
    pub iterations: usize,
    pub origin: Origin,
}

/// Distinct accepted critical points, ordered by energy then norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub points: Vec<CriticalPoint>,
    pub distinct_tol: f64,
    pub max_norm: f64,
    pub accept_tol: f64,
    /// Starts that did not yield a new solution.
    pub abandoned: Vec<AbandonedStart>,
    pub starts_tried: usize,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.energies.norm).collect()
    }

    pub fn contains_zero(&self) -> bool {
        self.points.iter().any(|p| p.u.is_zero())
    }
}

/// Deterministic order: energy total, then norm.
pub(crate) fn sort_points(points: &mut [CriticalPoint]) {
    points.sort_by(|a, b| {
        a.energies
            .total
            .total_cmp(&b.energies.total)
            .then(a.energies.norm.total_cmp(&b.energies.norm))
    });
}

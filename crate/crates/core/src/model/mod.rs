//! Problem data: the Kirchhoff coefficient `K`, nonlinearities `f`/`g`, a
//! specimen library and the sampling-based hypothesis audit.

mod hypotheses;
mod law;
mod nonlinearity;
mod specimens;

pub use hypotheses::{
    check_hypotheses, probe_profiles, ConditionResult, HypothesisReport, ProbeProfile, SamplingConfig, Status, Witness,
};
pub use law::{KirchhoffLaw, ScalarFn};
pub use nonlinearity::{FieldFn, Nonlinearity};
pub use specimens::{bump, linear, sine, sine_forcing, zero};
pub use specimens::{law_specimen, nonlinearity_specimen, specimen_library, Specimen, LAW_SPECIMENS, NONLINEARITY_SPECIMENS};

/// Absolute tolerance of the K̃ / F quadratures.
pub const PRIMITIVE_TOL: f64 = 1e-10;
/// Recursion limit of the adaptive Simpson rule.
pub const PRIMITIVE_MAX_DEPTH: u32 = 60;

/// `per_decade` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && per_decade > 0);
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).round() as usize).max(1);
    (0..=n).map(|i| lo * 10f64.powf(decades * i as f64 / n as f64)).collect()
}

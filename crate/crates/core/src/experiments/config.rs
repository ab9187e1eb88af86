//! Run configuration, read from TOML.
//!
//! ```toml
//! format_version = 1
//! seed = 42
//!
//! [domain]
//! dimension = 1          # 1 or 2
//! cells = [64]           # [n] or [nx, ny]
//! lengths = [1.0]        # [L] or [lx, ly]
//!
//! [law]
//! kind = "affine"        # affine (params [a, b]) | constant ([gamma]) | exp_decay ([])
//! params = [1.0, 1.0]
//! # alpha = 2.0          # override the growth exponent
//!
//! [nonlinearity]
//! specimen = "bump"      # bump | linear | sine | sine_forcing | zero
//! scale = 1.0
//! # q = 1.5              # override the growth exponent
//!
//! [perturbation]         # optional g, same keys as [nonlinearity]
//! specimen = "sine"
//!
//! [solve]
//! lambda_factor = 2.0    # or lambda = 3000.0
//! mu = 0.0
//!
//! [sweep]
//! lambda_factors = [1.5, 2.0, 3.0]    # or lambdas = [...]
//! mu = { strategy = "bisection", max_factor = 0.1, tol_factor = 1e-3 }
//! # mu = { strategy = "list", values = [0.0, 1.0, 2.0] }
//!
//! [refinement]           # optional nested series for theta-star
//! cells = [[32], [64], [128]]
//! ```
//!
//! Sections `[sampling]`, `[theta_star]`, `[solver]`, `[starts]`, `[fixed_point]`
//! and `[descent]` take the fields of the corresponding option structs; every
//! field has a default. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{assemble, build_interval_mesh, build_rect_mesh, AssembledOperators, Mesh};
use crate::model::{law_specimen, nonlinearity_specimen, KirchhoffLaw, Nonlinearity, SamplingConfig};
use crate::solvers::{DescentOptions, FixedPointOptions, NewtonOptions, StartOptions, ThetaOptions};

/// Version stamped into every config, report and table.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_version")]
    pub format_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub domain: DomainConfig,
    pub law: LawConfig,
    pub nonlinearity: NonlinearityConfig,
    #[serde(default)]
    pub perturbation: Option<NonlinearityConfig>,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub theta_star: ThetaOptions,
    #[serde(default)]
    pub solver: NewtonOptions,
    #[serde(default)]
    pub starts: StartOptions,
    #[serde(default)]
    pub fixed_point: FixedPointOptions,
    #[serde(default)]
    pub descent: DescentOptions,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub refinement: Option<RefinementConfig>,
}

fn default_version() -> u32 {
    FORMAT_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub dimension: usize,
    pub cells: Vec<usize>,
    #[serde(default)]
    pub lengths: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    pub specimen: String,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub q: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub lambda: Option<f64>,
    /// `λ = lambda_factor · θ*_est`.
    pub lambda_factor: Option<f64>,
    #[serde(default)]
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default)]
    pub lambda_factors: Option<Vec<f64>>,
    #[serde(default)]
    pub mu: MuStrategy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case", deny_unknown_fields)]
pub enum MuStrategy {
    /// Bisection for the largest `μ ∈ [0, max_factor·λ]` keeping three solutions,
    /// to absolute accuracy `tol_factor·λ`.
    Bisection {
        #[serde(default = "default_max_factor")]
        max_factor: f64,
        #[serde(default = "default_tol_factor")]
        tol_factor: f64,
    },
    List { values: Vec<f64> },
}

fn default_max_factor() -> f64 {
    0.1
}

fn default_tol_factor() -> f64 {
    1e-3
}

impl Default for MuStrategy {
    fn default() -> Self {
        MuStrategy::Bisection { max_factor: default_max_factor(), tol_factor: default_tol_factor() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinementConfig {
    /// Cell counts per level, coarse to fine, each nested in the next.
    pub cells: Vec<Vec<usize>>,
}

/// Everything a command needs, built from a validated config.
pub struct Setup {
    pub mesh: Mesh,
    pub ops: AssembledOperators,
    pub law: KirchhoffLaw,
    pub f: Nonlinearity,
    pub g: Option<Nonlinearity>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "format_version {} is not supported (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        self.domain.validate()?;
        self.build_law()?;
        self.build_nonlinearity(&self.nonlinearity)?;
        if let Some(p) = &self.perturbation {
            self.build_nonlinearity(p)?;
        }
        self.sampling.validate()?;
        self.theta_star.validate()?;
        self.solver.validate()?;
        self.starts.validate()?;
        if !(self.fixed_point.step_tol > 0.0 && self.fixed_point.accept_tol > 0.0) {
            return Err(Error::Config("fixed_point tolerances must be positive".into()));
        }
        if !(self.descent.grad_tol > 0.0 && self.descent.accept_tol > 0.0) {
            return Err(Error::Config("descent tolerances must be positive".into()));
        }
        self.solve.validate()?;
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        if let Some(r) = &self.refinement {
            r.validate(&self.domain)?;
        }
        Ok(())
    }

    pub fn build_law(&self) -> Result<KirchhoffLaw> {
        let law = law_specimen(&self.law.kind, &self.law.params)?;
        Ok(match self.law.alpha {
            Some(a) if a >= 1.0 && a.is_finite() => law.with_alpha(a),
            Some(a) => return Err(Error::Config(format!("law.alpha must be at least 1, got {a}"))),
            None => law,
        })
    }

    fn build_nonlinearity(&self, c: &NonlinearityConfig) -> Result<Nonlinearity> {
        if !(c.scale > 0.0 && c.scale.is_finite()) {
            return Err(Error::Config(format!("nonlinearity scale must be positive, got {}", c.scale)));
        }
        let mut nl = nonlinearity_specimen(&c.specimen)?;
        if c.scale != 1.0 {
            nl = nl.scaled(c.scale);
        }
        Ok(match c.q {
            Some(q) if q >= 0.0 && q.is_finite() => nl.with_q(q),
            Some(q) => return Err(Error::Config(format!("nonlinearity q must be nonnegative, got {q}"))),
            None => nl,
        })
    }

    /// Mesh, operators and problem data.
    pub fn setup(&self) -> Result<Setup> {
        self.setup_with_cells(&self.domain.cells)
    }

    pub fn setup_with_cells(&self, cells: &[usize]) -> Result<Setup> {
        let mesh = self.domain.mesh_with_cells(cells)?;
        let ops = assemble(&mesh)?;
        Ok(Setup {
            mesh,
            ops,
            law: self.build_law()?,
            f: self.build_nonlinearity(&self.nonlinearity)?,
            g: self.perturbation.as_ref().map(|p| self.build_nonlinearity(p)).transpose()?,
        })
    }
}

impl DomainConfig {
    fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dimension) {
            return Err(Error::Config(format!("domain.dimension must be 1 or 2, got {}", self.dimension)));
        }
        check_cells(self.dimension, &self.cells)?;
        if let Some(l) = &self.lengths {
            if l.len() != self.dimension || l.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(Error::Config(format!(
                    "domain.lengths needs {} positive entries, got {l:?}",
                    self.dimension
                )));
            }
        }
        Ok(())
    }

    fn mesh_with_cells(&self, cells: &[usize]) -> Result<Mesh> {
        let lengths = self.lengths.clone().unwrap_or_else(|| vec![1.0; self.dimension]);
        let built = match self.dimension {
            1 => build_interval_mesh(cells[0], lengths[0]),
            _ => build_rect_mesh(cells[0], cells[1], lengths[0], lengths[1]),
        };
        built.map_err(|e| Error::Config(e.to_string()))
    }
}

fn check_cells(dimension: usize, cells: &[usize]) -> Result<()> {
    if cells.len() != dimension {
        return Err(Error::Config(format!("domain.cells needs {dimension} entries, got {cells:?}")));
    }
    if cells.iter().any(|&c| c < 2) {
        return Err(Error::Config(format!("every cell count must be at least 2, got {cells:?}")));
    }
    Ok(())
}

impl SolveConfig {
    fn validate(&self) -> Result<()> {
        match (self.lambda, self.lambda_factor) {
            (Some(_), Some(_)) => return Err(Error::Config("solve: give lambda or lambda_factor, not both".into())),
            (Some(l), None) if !(l >= 0.0 && l.is_finite()) => {
                return Err(Error::Config(format!("solve.lambda must be nonnegative, got {l}")))
            }
            (None, Some(f)) if !(f >= 0.0 && f.is_finite()) => {
                return Err(Error::Config(format!("solve.lambda_factor must be nonnegative, got {f}")))
            }
            _ => {}
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::Config(format!("solve.mu must be nonnegative, got {}", self.mu)));
        }
        Ok(())
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        let grid = match (&self.lambdas, &self.lambda_factors) {
            (Some(_), Some(_)) => return Err(Error::Config("sweep: give lambdas or lambda_factors, not both".into())),
            (None, None) => return Err(Error::Config("sweep: the lambda grid is empty".into())),
            (Some(g), None) | (None, Some(g)) => g,
        };
        if grid.is_empty() || grid.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::Config(format!("sweep: lambda grid must be nonempty and positive, got {grid:?}")));
        }
        match &self.mu {
            MuStrategy::Bisection { max_factor, tol_factor } => {
                if !(*max_factor > 0.0 && *tol_factor > 0.0 && tol_factor < max_factor) {
                    return Err(Error::Config("sweep.mu bisection needs 0 < tol_factor < max_factor".into()));
                }
            }
            MuStrategy::List { values } => {
                if values.is_empty() || values.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
                    return Err(Error::Config("sweep.mu list must be nonempty and nonnegative".into()));
                }
            }
        }
        Ok(())
    }
}

impl RefinementConfig {
    fn validate(&self, domain: &DomainConfig) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::Config("refinement.cells is empty".into()));
        }
        for c in &self.cells {
            check_cells(domain.dimension, c)?;
        }
        for w in self.cells.windows(2) {
            if w[0].iter().zip(&w[1]).any(|(a, b)| b < a || b % a != 0) {
                return Err(Error::Config(format!("refinement levels {:?} -> {:?} are not nested", w[0], w[1])));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        seed = 3
        [domain]
        dimension = 1
        cells = [16]
        [law]
        kind = "affine"
        params = [1.0, 1.0]
        [nonlinearity]
        specimen = "bump"
    "#;

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.format_version, FORMAT_VERSION);
        assert_eq!(cfg.solver.accept_tol, 1e-8);
        assert!(cfg.sweep.is_none());
        let s = cfg.setup().unwrap();
        assert_eq!(s.ops.num_dofs(), 15);
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig::from_toml_str(MINIMAL).unwrap();
        let again = RunConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = [
            MINIMAL.replace("cells = [16]", "cells = [0]"),
            MINIMAL.replace("cells = [16]", "cells = [16, 16]"),
            MINIMAL.replace("\"affine\"", "\"cubic\""),
            MINIMAL.replace("\"bump\"", "\"nope\""),
            MINIMAL.replace("seed = 3", "seed = 3\nbogus = 1"),
            format!("{MINIMAL}\n[sweep]\nlambdas = []\n"),
            format!("{MINIMAL}\n[solve]\nlambda = 1.0\nlambda_factor = 2.0\n"),
            format!("{MINIMAL}\n[refinement]\ncells = [[16], [24]]\n"),
            format!("{MINIMAL}\n[solver]\naccept_tol = -1.0\n"),
        ];
        for text in &bad {
            let err = RunConfig::from_toml_str(text).unwrap_err();
            assert!(err.is_usage(), "{err}");
        }
    }

    #[test]
    fn sweep_strategies_parse() {
        let text = format!("{MINIMAL}\n[sweep]\nlambda_factors = [2.0]\nmu = {{ strategy = \"list\", values = [0.0, 1.0] }}\n");
        let cfg = RunConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.sweep.unwrap().mu, MuStrategy::List { values: vec![0.0, 1.0] });
        let text = format!("{MINIMAL}\n[sweep]\nlambdas = [2.0]\n");
        let cfg = RunConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.sweep.unwrap().mu, MuStrategy::default());
    }
}

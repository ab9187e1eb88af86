use serde::{Deserialize, Serialize};

use super::config::{RunConfig, Setup};
use super::report::{cell_seed, node_coords, SolutionRecord, ThetaSummary};
use super::FORMAT_VERSION;
use crate::error::{Error, Result};
use crate::fem::{FeFunction, Point};
use crate::model::{check_hypotheses, ConditionResult, HypothesisReport, Status};
use crate::solvers::{
    dirichlet_eigenpairs, estimate_theta_star, estimate_theta_star_seeded, newton_deflated, start_library,
    AbandonedStart, EigenPairs, SolutionSet, ThetaStarEstimate,
};
use crate::variational::Problem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub format_version: u32,
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
    pub hypotheses: HypothesisReport,
    /// Growth class of the perturbation `g`, when one is configured.
    pub perturbation_growth: Option<ConditionResult>,
    pub exit_code: i32,
}

impl CheckReport {
    pub fn summary(&self) -> String {
        let mut lines: Vec<String> = self
            .hypotheses
            .conditions()
            .iter()
            .map(|(name, c)| format!("{name:<7} {:<12} {}", status_word(c.status()), c.summary()))
            .collect();
        if let Some(g) = &self.perturbation_growth {
            lines.push(format!("{:<7} {:<12} {}", "g", status_word(g.status()), g.summary()));
        }
        lines.join("\n")
    }
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "FAIL",
        Status::Inconclusive => "inconclusive",
    }
}

/// Audit the configured law and nonlinearity; exit code 1 iff some condition fails.
pub fn cmd_check(cfg: &RunConfig) -> Result<CheckReport> {
    let s = cfg.setup()?;
    let hypotheses = check_hypotheses(&s.law, &s.f, &s.ops, &cfg.sampling)?;
    let perturbation_growth = match &s.g {
        Some(g) => Some(check_hypotheses(&s.law, g, &s.ops, &cfg.sampling)?.growth),
        None => None,
    };
    let failed = hypotheses.any_fail() || perturbation_growth.as_ref().is_some_and(|g| g.status() == Status::Fail);
    Ok(CheckReport {
        format_version: FORMAT_VERSION,
        command: "check".into(),
        seed: cfg.seed,
        config: cfg.clone(),
        hypotheses,
        perturbation_growth,
        exit_code: i32::from(failed),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementLevel {
    pub cells: Vec<usize>,
    pub mesh_id: String,
    pub value: f64,
    pub phi: f64,
    pub j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub format_version: u32,
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
    pub nodes: Vec<Point>,
    pub estimate: ThetaSummary,
    /// Nested series, coarse to fine; each level also searches along the
    /// previous minimizer.
    pub refinement: Vec<RefinementLevel>,
    pub refinement_nonincreasing: Option<bool>,
}

impl ThetaReport {
    pub fn summary(&self) -> String {
        let mut out = format!("theta* <= {:.10e} on {}", self.estimate.value, self.estimate.mesh_id);
        for l in &self.refinement {
            out.push_str(&format!("\n  {:<24} {:.10e}", l.mesh_id, l.value));
        }
        if let Some(ok) = self.refinement_nonincreasing {
            out.push_str(if ok { "\n  refinement series nonincreasing" } else { "\n  refinement series INCREASED" });
        }
        out
    }
}

pub fn cmd_theta_star(cfg: &RunConfig) -> Result<ThetaReport> {
    let s = cfg.setup()?;
    let est = estimate_theta_star(&s.ops, &s.law, &s.f, &cfg.theta_star, cfg.seed)?;
    let mut refinement = Vec::new();
    if let Some(r) = &cfg.refinement {
        let mut prev: Option<(crate::fem::Mesh, FeFunction)> = None;
        for cells in &r.cells {
            let level = cfg.setup_with_cells(cells)?;
            let extra: Vec<FeFunction> = prev
                .iter()
                .map(|(m, u)| FeFunction::new(level.mesh.prolongate_from(m, u)))
                .collect();
            let e = estimate_theta_star_seeded(&level.ops, &level.law, &level.f, &cfg.theta_star, cfg.seed, &extra)?;
            refinement.push(RefinementLevel { cells: cells.clone(), mesh_id: e.mesh_id.clone(), value: e.value, phi: e.phi, j: e.j });
            prev = Some((level.mesh, e.minimizer));
        }
    }
    let refinement_nonincreasing = (!refinement.is_empty()).then(|| refinement.windows(2).all(|w| w[1].value <= w[0].value));
    Ok(ThetaReport {
        format_version: FORMAT_VERSION,
        command: "theta-star".into(),
        seed: cfg.seed,
        config: cfg.clone(),
        nodes: node_coords(&s.mesh),
        estimate: ThetaSummary::new(&s.mesh, &est),
        refinement,
        refinement_nonincreasing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub format_version: u32,
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
    pub lambda: f64,
    pub mu: f64,
    pub theta_star: Option<f64>,
    /// Seed of the random part of the start library.
    pub start_seed: u64,
    pub mesh_id: String,
    pub nodes: Vec<Point>,
    pub distinct_tol: f64,
    pub accept_tol: f64,
    pub max_norm: f64,
    pub starts_tried: usize,
    pub solutions: Vec<SolutionRecord>,
    pub abandoned: Vec<AbandonedStart>,
}

impl SolveReport {
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{} solution(s) at lambda = {:.6e}, mu = {:.6e} ({} starts)",
            self.solutions.len(),
            self.lambda,
            self.mu,
            self.starts_tried
        );
        for s in &self.solutions {
            out.push_str(&format!(
                "\n  |u| = {:.6e}  E = {:+.6e}  |R| = {:.2e}",
                s.norm, s.energies.total, s.residual_norm
            ));
        }
        out
    }
}

/// State shared by every cell of a solve or sweep.
pub(crate) struct SolveContext {
    pub setup: Setup,
    pub theta: Option<ThetaStarEstimate>,
    pub eigen: EigenPairs,
}

impl SolveContext {
    /// `need_theta`: a missing threshold is an error rather than a skipped start family.
    pub fn new(cfg: &RunConfig, need_theta: bool) -> Result<Self> {
        let setup = cfg.setup()?;
        let theta = match estimate_theta_star(&setup.ops, &setup.law, &setup.f, &cfg.theta_star, cfg.seed) {
            Ok(e) => Some(e),
            Err(Error::Feasibility(_)) if !need_theta => None,
            Err(e) => return Err(e),
        };
        let eigen = dirichlet_eigenpairs(&setup.ops, cfg.starts.eigen_count)?;
        Ok(SolveContext { setup, theta, eigen })
    }

    pub fn solve_cell(&self, cfg: &RunConfig, lambda: f64, mu: f64) -> Result<(SolutionSet, u64)> {
        let s = &self.setup;
        let seed = cell_seed(cfg.seed, lambda, mu);
        let starts = start_library(
            s.ops.num_dofs(),
            &self.eigen,
            self.theta.as_ref().map(|t| &t.minimizer),
            &cfg.starts,
            seed,
        );
        let mut problem = Problem::new(&s.ops, &s.law, &s.f).with_params(lambda, mu);
        problem.g = s.g.as_ref();
        if mu != 0.0 && problem.g.is_none() {
            return Err(Error::Config("mu > 0 needs a [perturbation] section".into()));
        }
        Ok((newton_deflated(&problem, &starts, &cfg.solver)?, seed))
    }
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<SolveReport> {
    let lambda_given = cfg.solve.lambda;
    if lambda_given.is_none() && cfg.solve.lambda_factor.is_none() {
        return Err(Error::Config("solve needs lambda or lambda_factor".into()));
    }
    let ctx = SolveContext::new(cfg, lambda_given.is_none())?;
    let theta = ctx.theta.as_ref().map(|t| t.value);
    let lambda = match (lambda_given, cfg.solve.lambda_factor, theta) {
        (Some(l), _, _) => l,
        (None, Some(f), Some(t)) => f * t,
        _ => unreachable!("validated above"),
    };
    let mu = cfg.solve.mu;
    let (set, start_seed) = ctx.solve_cell(cfg, lambda, mu)?;
    let mesh = &ctx.setup.mesh;
    Ok(SolveReport {
        format_version: FORMAT_VERSION,
        command: "solve".into(),
        seed: cfg.seed,
        config: cfg.clone(),
        lambda,
        mu,
        theta_star: theta,
        start_seed,
        mesh_id: mesh.id(),
        nodes: node_coords(mesh),
        distinct_tol: set.distinct_tol,
        accept_tol: set.accept_tol,
        max_norm: set.max_norm,
        starts_tried: set.starts_tried,
        solutions: set.points.iter().map(|p| SolutionRecord::new(mesh, p)).collect(),
        abandoned: set.abandoned,
    })
}

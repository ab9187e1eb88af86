//! `(λ, μ)` sweeps: three-solution counts, empirical `δ` per `λ` and empirical `r`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::commands::SolveContext;
use super::config::{MuStrategy, RunConfig};
use super::report::{node_coords, SolutionRecord};
use super::{Verbosity, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::fem::Point;

/// A cell counts as "three solutions" at this many distinct members.
const TARGET_COUNT: usize = 3;
/// Extra halvings allowed when bisection has not yet left `μ = 0`.
const MAX_EXTRA_HALVINGS: usize = 60;

/// Column order of `sweep.csv`.
pub const SWEEP_COLUMNS: [&str; 10] = [
    "format_version",
    "lambda_index",
    "lambda",
    "mu",
    "count",
    "max_norm",
    "min_pairwise_distance",
    "max_residual",
    "seed",
    "status",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub lambda_index: usize,
    pub lambda: f64,
    pub mu: f64,
    pub seed: u64,
    pub count: usize,
    pub max_norm: f64,
    /// `None` with fewer than two solutions.
    pub min_pairwise_distance: Option<f64>,
    pub max_residual: f64,
    pub solutions: Vec<SolutionRecord>,
    /// Set when the cell failed; the sweep goes on.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda_index: usize,
    pub lambda: f64,
    /// `λ ≤ θ*_est`: outside the range where three solutions are expected.
    pub exploratory: bool,
    pub count_at_zero: usize,
    /// `1.1 ×` the largest norm at `μ = 0`, when that cell has three solutions.
    pub r_at_zero: Option<f64>,
    /// Largest sampled `μ` with three solutions (bisection: lower bracket).
    pub delta: Option<f64>,
    /// `δ` hit the top of the search range.
    pub delta_capped: bool,
    pub mu_max: Option<f64>,
    pub bisection_steps: usize,
    /// Samples that break the `[0, δ]` interval picture.
    pub anomalies: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub format_version: u32,
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
    pub theta_star: Option<f64>,
    pub mesh_id: String,
    pub nodes: Vec<Point>,
    pub rows: Vec<SweepRow>,
    /// All cells, row by row in evaluation order.
    pub cells: Vec<SweepCell>,
    /// `1.1 ×` the largest norm over all cells with three solutions.
    pub empirical_r: Option<f64>,
}

impl SweepReport {
    pub fn summary(&self) -> String {
        let mut out = match self.theta_star {
            Some(t) => format!("theta* <= {t:.6e}; {} cells", self.cells.len()),
            None => format!("theta* unavailable; {} cells", self.cells.len()),
        };
        for r in &self.rows {
            let delta = r.delta.map_or("none".to_string(), |d| format!("{d:.4e}{}", if r.delta_capped { " (cap)" } else { "" }));
            out.push_str(&format!(
                "\n  lambda = {:.6e}{}  count(mu=0) = {}  delta = {}{}",
                r.lambda,
                if r.exploratory { " [exploratory]" } else { "" },
                r.count_at_zero,
                delta,
                if r.anomalies.is_empty() { String::new() } else { format!("  anomalies: {}", r.anomalies.len()) }
            ));
        }
        if let Some(r) = self.empirical_r {
            out.push_str(&format!("\n  empirical r = {r:.6e}"));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(SWEEP_COLUMNS)?;
        for c in &self.cells {
            w.write_record([
                self.format_version.to_string(),
                c.lambda_index.to_string(),
                c.lambda.to_string(),
                c.mu.to_string(),
                c.count.to_string(),
                c.max_norm.to_string(),
                c.min_pairwise_distance.map_or(String::new(), |d| d.to_string()),
                c.max_residual.to_string(),
                c.seed.to_string(),
                if c.error.is_some() { "failed".into() } else { "ok".into() },
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn cmd_sweep(cfg: &RunConfig, verbosity: Verbosity) -> Result<SweepReport> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("the sweep command needs a [sweep] section".into()))?;
    let needs_theta = sweep.lambda_factors.is_some();
    let ctx = SolveContext::new(cfg, needs_theta)?;
    let theta = ctx.theta.as_ref().map(|t| t.value);
    let lambdas: Vec<f64> = match (&sweep.lambdas, &sweep.lambda_factors, theta) {
        (Some(l), _, _) => l.clone(),
        (None, Some(f), Some(t)) => f.iter().map(|x| x * t).collect(),
        _ => unreachable!("validated config"),
    };
    if verbosity >= Verbosity::Verbose {
        eprintln!("sweep: {} lambda values, theta* = {theta:?}", lambdas.len());
    }

    let rows: Vec<(SweepRow, Vec<SweepCell>)> = lambdas
        .par_iter()
        .enumerate()
        .map(|(i, &lambda)| sweep_row(&ctx, cfg, &sweep.mu, i, lambda, theta, verbosity))
        .collect();

    let mut out_rows = Vec::with_capacity(rows.len());
    let mut cells = Vec::new();
    for (row, row_cells) in rows {
        out_rows.push(row);
        cells.extend(row_cells);
    }
    let empirical_r = cells
        .iter()
        .filter(|c| c.count >= TARGET_COUNT)
        .map(|c| c.max_norm)
        .fold(None, |acc: Option<f64>, n| Some(acc.map_or(n, |a| a.max(n))))
        .map(|m| 1.1 * m);
    let mesh = &ctx.setup.mesh;
    Ok(SweepReport {
        format_version: FORMAT_VERSION,
        command: "sweep".into(),
        seed: cfg.seed,
        config: cfg.clone(),
        theta_star: theta,
        mesh_id: mesh.id(),
        nodes: node_coords(mesh),
        rows: out_rows,
        cells,
        empirical_r,
    })
}

fn run_cell(ctx: &SolveContext, cfg: &RunConfig, i: usize, lambda: f64, mu: f64) -> SweepCell {
    let mesh = &ctx.setup.mesh;
    let ops = &ctx.setup.ops;
    let failed = |seed: u64, e: Error| SweepCell {
        lambda_index: i,
        lambda,
        mu,
        seed,
        count: 0,
        max_norm: 0.0,
        min_pairwise_distance: None,
        max_residual: 0.0,
        solutions: vec![],
        error: Some(e.to_string()),
    };
    match ctx.solve_cell(cfg, lambda, mu) {
        Ok((set, seed)) => {
            let mut min_dist: Option<f64> = None;
            for (a, p) in set.points.iter().enumerate() {
                for q in &set.points[a + 1..] {
                    match ops.h1_distance(&p.u, &q.u) {
                        Ok(d) => min_dist = Some(min_dist.map_or(d, |m| m.min(d))),
                        Err(e) => return failed(seed, e),
                    }
                }
            }
            SweepCell {
                lambda_index: i,
                lambda,
                mu,
                seed,
                count: set.len(),
                max_norm: set.max_norm,
                min_pairwise_distance: min_dist,
                max_residual: set.points.iter().map(|p| p.residual_norm).fold(0.0, f64::max),
                solutions: set.points.iter().map(|p| SolutionRecord::new(mesh, p)).collect(),
                error: None,
            }
        }
        Err(e) => failed(super::report::cell_seed(cfg.seed, lambda, mu), e),
    }
}

fn sweep_row(
    ctx: &SolveContext,
    cfg: &RunConfig,
    strategy: &MuStrategy,
    i: usize,
    lambda: f64,
    theta: Option<f64>,
    verbosity: Verbosity,
) -> (SweepRow, Vec<SweepCell>) {
    let mut cells: Vec<SweepCell> = Vec::new();
    let eval = |mu: f64, cells: &mut Vec<SweepCell>| -> bool {
        if let Some(c) = cells.iter().find(|c| c.mu == mu) {
            return c.count >= TARGET_COUNT;
        }
        let c = run_cell(ctx, cfg, i, lambda, mu);
        if verbosity >= Verbosity::Verbose {
            eprintln!("  lambda[{i}] = {lambda:.4e} mu = {mu:.4e}: {} solution(s)", c.count);
        }
        let ok = c.count >= TARGET_COUNT;
        cells.push(c);
        ok
    };

    let ok0 = eval(0.0, &mut cells);
    let mut row = SweepRow {
        lambda_index: i,
        lambda,
        exploratory: theta.is_none_or(|t| lambda <= t),
        count_at_zero: cells[0].count,
        r_at_zero: ok0.then(|| 1.1 * cells[0].max_norm),
        delta: None,
        delta_capped: false,
        mu_max: None,
        bisection_steps: 0,
        anomalies: Vec::new(),
    };

    match strategy {
        MuStrategy::List { values } => {
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            for &mu in &sorted {
                eval(mu, &mut cells);
            }
            row.mu_max = sorted.last().copied();
            row.delta = cells.iter().filter(|c| c.count >= TARGET_COUNT).map(|c| c.mu).reduce(f64::max);
        }
        MuStrategy::Bisection { max_factor, tol_factor } => {
            let hi0 = max_factor * lambda;
            row.mu_max = Some(hi0);
            if ok0 {
                if eval(hi0, &mut cells) {
                    row.delta = Some(hi0);
                    row.delta_capped = true;
                } else {
                    let (mut lo, mut hi) = (0.0, hi0);
                    let tol = tol_factor * lambda;
                    while hi - lo > tol {
                        let mid = 0.5 * (lo + hi);
                        if eval(mid, &mut cells) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                        row.bisection_steps += 1;
                    }
                    // a zero lower bracket says nothing about δ > 0; keep halving
                    let mut extra = 0;
                    while lo == 0.0 && extra < MAX_EXTRA_HALVINGS {
                        hi *= 0.5;
                        if eval(hi, &mut cells) {
                            lo = hi;
                        }
                        extra += 1;
                        row.bisection_steps += 1;
                    }
                    row.delta = (lo > 0.0).then_some(lo);
                }
                if let Some(d) = row.delta {
                    eval(0.5 * d, &mut cells);
                }
            } else {
                row.anomalies.push(format!("fewer than {TARGET_COUNT} solutions at mu = 0"));
            }
        }
    }

    if let Some(d) = row.delta {
        let mut sampled: Vec<&SweepCell> = cells.iter().filter(|c| c.mu <= d).collect();
        sampled.sort_by(|a, b| a.mu.total_cmp(&b.mu));
        for c in sampled {
            if c.count < TARGET_COUNT {
                row.anomalies.push(format!(
                    "mu = {:.6e} <= delta has {} solution(s){}",
                    c.mu,
                    c.count,
                    c.error.as_deref().map_or(String::new(), |e| format!(" ({e})"))
                ));
            }
        }
    }
    (row, cells)
}

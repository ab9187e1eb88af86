//! Config-driven commands behind the `kirchhoff` binary.
//!
//! Every command returns a serializable report. [`run`] writes it to the output
//! directory as pretty JSON (plus a CSV table for sweeps) and maps the outcome to
//! an exit status: 0 success, 1 mathematical failure, 2 config or usage error.

mod commands;
mod config;
mod report;
mod sweep;

use std::path::{Path, PathBuf};

pub use commands::{cmd_check, cmd_solve, cmd_theta_star, CheckReport, RefinementLevel, SolveReport, ThetaReport};
pub use config::{
    DomainConfig, LawConfig, MuStrategy, NonlinearityConfig, RefinementConfig, RunConfig, Setup, SolveConfig,
    SweepConfig, FORMAT_VERSION,
};
pub use report::{cell_seed, SolutionRecord, ThetaSummary};
pub use sweep::{cmd_sweep, SweepCell, SweepReport, SweepRow, SWEEP_COLUMNS};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    ThetaStar,
    Solve,
    Sweep,
}

impl Command {
    pub fn report_name(self) -> &'static str {
        match self {
            Command::Check => "hypotheses.json",
            Command::ThetaStar => "theta_star.json",
            Command::Solve => "solutions.json",
            Command::Sweep => "sweep.json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub enum Verbosity {
    Quiet,
    #[default]
    Normal,
    Verbose,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Run `command`, write its files under `out_dir` and report the exit status.
pub fn run(command: Command, cfg: &RunConfig, out_dir: &Path, verbosity: Verbosity) -> Result<Outcome> {
    std::fs::create_dir_all(out_dir)?;
    let report_path = out_dir.join(command.report_name());
    let mut files = vec![report_path.clone()];
    let (exit_code, summary) = match command {
        Command::Check => {
            let r = cmd_check(cfg)?;
            report::write_json(&report_path, &r)?;
            (r.exit_code, r.summary())
        }
        Command::ThetaStar => {
            let r = cmd_theta_star(cfg)?;
            report::write_json(&report_path, &r)?;
            (0, r.summary())
        }
        Command::Solve => {
            let r = cmd_solve(cfg)?;
            report::write_json(&report_path, &r)?;
            (if r.solutions.is_empty() { 1 } else { 0 }, r.summary())
        }
        Command::Sweep => {
            let r = cmd_sweep(cfg, verbosity)?;
            report::write_json(&report_path, &r)?;
            let table = out_dir.join("sweep.csv");
            r.write_csv(&table)?;
            files.push(table);
            (if r.cells.iter().any(|c| c.error.is_none()) { 0 } else { 1 }, r.summary())
        }
    };
    Ok(Outcome { exit_code, files, summary })
}

/// Exit status for an error: 2 for config problems, 1 otherwise.
pub fn exit_code_for(err: &Error) -> i32 {
    if err.is_usage() {
        2
    } else {
        1
    }
}

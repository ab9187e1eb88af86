//! Batch driver: `kirchhoff <check|theta-star|solve|sweep> --config run.toml`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kirchhoff::experiments::{exit_code_for, run, Command, RunConfig, Verbosity};

#[derive(Parser)]
#[command(name = "kirchhoff", version, about = "Kirchhoff-type problems: audits, thresholds, multi-solution search")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, short, global = true, conflicts_with = "verbose")]
    quiet: bool,

    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Audit the hypotheses on K, f (and the growth of g).
    Check,
    /// Estimate the threshold θ*.
    ThetaStar,
    /// Search for all solutions at one (λ, μ).
    Solve,
    /// Sweep λ and μ; report empirical δ and r.
    Sweep,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbosity = if cli.quiet {
        Verbosity::Quiet
    } else if cli.verbose {
        Verbosity::Verbose
    } else {
        Verbosity::Normal
    };
    let command = match cli.command {
        Cmd::Check => Command::Check,
        Cmd::ThetaStar => Command::ThetaStar,
        Cmd::Solve => Command::Solve,
        Cmd::Sweep => Command::Sweep,
    };
    let Some(path) = cli.config else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(2);
    };
    let outcome = RunConfig::load(&path).and_then(|mut cfg| {
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        run(command, &cfg, &cli.out, verbosity)
    });
    match outcome {
        Ok(o) => {
            if verbosity > Verbosity::Quiet {
                println!("{}", o.summary);
                for f in &o.files {
                    println!("wrote {}", f.display());
                }
            }
            ExitCode::from(o.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}

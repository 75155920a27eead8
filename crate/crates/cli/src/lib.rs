//! Command-line front end: fixture I/O, identity suite, hypothesis
//! checks, end-to-end solves and report emission.

pub mod commands;
pub mod error;
pub mod fixture;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use koszul_core::identities::SuiteConfig;

use crate::commands::GlobalOptions;
use crate::error::CliError;
use crate::fixture::{FixtureFile, NormModeSpec, SolutionFile};
use crate::report::ReportFile;

#[derive(Debug, Parser)]
#[command(name = "koszul", version, about = "Matrix corona solver and identity checker")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Comma-separated grid radii in [0, 1).
    #[arg(long, global = true, value_delimiter = ',')]
    pub grid_radii: Option<Vec<f64>>,
    /// Number of angles per radius.
    #[arg(long, global = true)]
    pub grid_angles: Option<usize>,
    /// Relative residual tolerance of the scalar solves.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Maximum degree of the solved polynomials.
    #[arg(long, global = true)]
    pub degree_cap: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
}

impl GlobalArgs {
    pub fn options(&self) -> GlobalOptions {
        GlobalOptions {
            grid_radii: self.grid_radii.clone(),
            grid_angles: self.grid_angles,
            tol: self.tol,
            degree_cap: self.degree_cap,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Randomized identity and lemma suites.
    Identities {
        #[arg(long, default_value_t = SuiteConfig::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = SuiteConfig::default().max_m)]
        max_m: usize,
        #[arg(long, default_value_t = SuiteConfig::default().max_d)]
        max_d: usize,
        #[arg(long, default_value_t = SuiteConfig::default().instances)]
        instances: usize,
    },
    /// Check the hypotheses on a fixture.
    Check {
        fixture: PathBuf,
        #[arg(long, value_enum)]
        norm_mode: Option<NormModeSpec>,
    },
    /// Solve F G = H for a fixture.
    Solve {
        fixture: PathBuf,
        /// Solution file for G.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-point residual dump.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check the necessary inequality for FG = H^n.
    Radical {
        fixture: PathBuf,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        g: PathBuf,
    },
    /// Solve with F = [F1 F2], H taken from the first fixture.
    Concat { a: PathBuf, b: PathBuf },
    /// Evaluate the auxiliary function alpha.
    Alpha {
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[arg(long)]
        c: Option<f64>,
    },
    /// Norm bound constants for given m and k.
    Bound {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
    },
}

/// Runs one command and returns its report.
pub fn run(cli: &Cli) -> Result<ReportFile, CliError> {
    let global = cli.global.options();
    match &cli.command {
        Command::Identities { seed, max_m, max_d, instances } => {
            let config = SuiteConfig {
                seed: *seed,
                instances: *instances,
                max_m: *max_m,
                max_d: *max_d,
                ..SuiteConfig::default()
            };
            commands::cmd_identities(&config)
        }
        Command::Check { fixture, norm_mode } => commands::cmd_check(&FixtureFile::load(fixture)?, &global, *norm_mode),
        Command::Solve { fixture, out, csv } => {
            let fx = FixtureFile::load(fixture)?;
            let output = commands::cmd_solve(&fx, &global)?;
            if let Some(bundle) = &output.bundle {
                if let Some(path) = out {
                    SolutionFile::new(fx.id.clone(), &bundle.g).save(path)?;
                }
                if let Some(path) = csv {
                    commands::write_residual_csv(path, &output.grid, &bundle.residuals)?;
                }
            }
            Ok(output.report)
        }
        Command::Radical { fixture, n, g } => {
            commands::cmd_radical(&FixtureFile::load(fixture)?, &SolutionFile::load(g)?, *n, &global)
        }
        Command::Concat { a, b } => commands::cmd_concat(&FixtureFile::load(a)?, &FixtureFile::load(b)?, &global),
        Command::Alpha { t, c } => commands::cmd_alpha(*t, *c),
        Command::Bound { m, k } => commands::cmd_bound(*m, *k),
    }
}

/// Parses `KOSZUL_THREADS`; `0` or unset means automatic.
pub fn thread_count(value: Option<&str>) -> Result<usize, CliError> {
    match value {
        None => Ok(0),
        Some(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::invalid(format!("KOSZUL_THREADS must be a non-negative integer, got {s:?}"))),
    }
}

//! Batch front-end: bound states, resonances, plateau scans, critical
//! screening and golden-table reproduction for screened Coulomb potentials.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 when a search
//! fails to converge or a reproduction gate fails. Partial results are
//! still written in the last case.

// `!(x > 0.0)` style guards are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jmatrix::tables::TableId;

use config::{parse_breakpoints, parse_complex, BasisBlock, ConfigError, PotentialBlock, RawConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_FAILED: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "jmatrix", version, about = "J-matrix bound states and resonances of screened Coulomb potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// TOML or JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// yukawa, hulthen, coulomb, paper-fig1, paper-fig1-flat or piecewise.
    #[arg(long, global = true)]
    potential: Option<String>,
    #[arg(long = "A", global = true, allow_hyphen_values = true)]
    strength: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long = "Z", global = true, allow_hyphen_values = true)]
    charge: Option<f64>,
    #[arg(long, global = true)]
    ell: Option<u32>,
    #[arg(long = "N", global = true)]
    n_basis: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// table1-free or coulomb.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// csv or json.
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Piecewise envelope as `x0:F0,x1:F1,...`.
    #[arg(long, global = true)]
    breakpoints: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bound-state energies.
    Bound {
        /// Bottom of the search window; found automatically when omitted.
        #[arg(long, allow_hyphen_values = true)]
        e_lo: Option<f64>,
    },
    /// Resonances from complex rotation, optionally refined from user seeds.
    Resonances {
        /// Rotation angles, comma separated.
        #[arg(long, value_delimiter = ',')]
        theta: Option<Vec<f64>>,
        #[arg(long)]
        max_energy: Option<f64>,
        /// Extra seed `re,im`; repeatable.
        #[arg(long = "seed", allow_hyphen_values = true)]
        seeds: Vec<String>,
        /// Rotation angle used when refining user seeds.
        #[arg(long)]
        seed_theta: Option<f64>,
    },
    /// Plateau scan over basis scales and sizes; reports stable digits.
    Scan {
        /// Scales to scan, comma separated.
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        /// Basis sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Bound level counted from the bottom.
        #[arg(long)]
        state: Option<usize>,
        /// Track the resonance nearest `re,im` instead.
        #[arg(long, allow_hyphen_values = true)]
        near: Option<String>,
    },
    /// Critical screening of a bound level by bisection.
    Critical {
        #[arg(long)]
        state: Option<usize>,
        #[arg(long)]
        mu_lo: Option<f64>,
        #[arg(long)]
        mu_hi: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Recompute a golden table (2a, 2b, 3 or 4) and grade each row.
    Reproduce { table: String },
    /// |S(E)| on a real energy grid.
    SmatrixScan {
        #[arg(long)]
        e_min: Option<f64>,
        #[arg(long)]
        e_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
}

fn flag_config(cli: &Cli) -> Result<RawConfig, ConfigError> {
    let c = &cli.common;
    let mut raw = RawConfig {
        potential: Some(PotentialBlock {
            name: c.potential.clone(),
            a: c.strength,
            mu: c.mu,
            z: c.charge,
            breakpoints: c.breakpoints.as_deref().map(parse_breakpoints).transpose()?,
        }),
        basis: Some(BasisBlock { ell: c.ell, lambda: c.lambda, n: c.n_basis }),
        mode: c.mode.clone(),
        format: c.format.clone(),
        output: c.output.clone(),
        ..Default::default()
    };
    match &cli.command {
        Command::Bound { e_lo } => raw.bound = Some(config::BoundBlock { e_lo: *e_lo }),
        Command::Resonances { theta, max_energy, seeds, seed_theta } => {
            let seeds = if seeds.is_empty() {
                None
            } else {
                Some(seeds.iter().map(|s| parse_complex("resonances.seeds", s)).collect::<Result<Vec<_>, _>>()?)
            };
            raw.resonances =
                Some(config::ResonanceBlock { theta: theta.clone(), max_energy: *max_energy, seeds, seed_theta: *seed_theta });
        }
        Command::Scan { lambdas, sizes, state, near } => {
            let near = near.as_deref().map(|s| parse_complex("scan.near", s)).transpose()?;
            raw.scan = Some(config::ScanBlock { lambda: lambdas.clone(), n: sizes.clone(), state: *state, near });
        }
        Command::Critical { state, mu_lo, mu_hi, tol } => {
            raw.critical = Some(config::CriticalBlock { state: *state, mu_lo: *mu_lo, mu_hi: *mu_hi, tol: *tol });
        }
        Command::SmatrixScan { e_min, e_max, points } => {
            raw.smatrix = Some(config::SmatrixBlock { e_min: *e_min, e_max: *e_max, points: *points });
        }
        Command::Reproduce { .. } => {}
    }
    Ok(raw)
}

fn thread_pool() -> Result<(), ConfigError> {
    let Ok(value) = std::env::var("SPECTRA_THREADS") else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError::new("SPECTRA_THREADS", format!("`{value}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| ConfigError::new("SPECTRA_THREADS", e.to_string()))
}

fn run(cli: &Cli) -> Result<commands::Outcome, ConfigError> {
    thread_pool()?;
    let file = match &cli.common.config {
        Some(path) => RawConfig::from_path(path)?,
        None => RawConfig::default(),
    };
    let raw = file.overlay(flag_config(cli)?);
    let target = raw.output()?;
    let outcome = match &cli.command {
        Command::Bound { .. } => commands::bound(&raw)?,
        Command::Resonances { .. } => commands::resonances(&raw)?,
        Command::Scan { .. } => commands::scan(&raw)?,
        Command::Critical { .. } => commands::critical(&raw)?,
        Command::SmatrixScan { .. } => commands::smatrix_scan(&raw)?,
        Command::Reproduce { table } => {
            let id: TableId = table.parse().map_err(|e: jmatrix::Error| ConfigError::from(e))?;
            let outcome = commands::reproduce(&raw, id)?;
            for line in commands::reproduce_summary(&outcome.table) {
                eprintln!("reproduce {}: {line}", id.as_str());
            }
            outcome
        }
    };
    output::write(&target, &outcome.table)?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) if outcome.failures.is_empty() => ExitCode::SUCCESS,
        Ok(outcome) => {
            for f in &outcome.failures {
                eprintln!("error: {f}");
            }
            ExitCode::from(EXIT_FAILED)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

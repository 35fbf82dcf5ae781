//! `prodsys check|index|powers --config <path>`: runs library checks from a
//! JSON experiment file and emits a JSON report and a plain-text table.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 the configuration or
//! command line is invalid.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::{cmd_check, cmd_index, cmd_powers};
pub use config::{ConfigError, ExperimentConfig, Settings};
pub use report::Report;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "prodsys", version, about = "Inclusion systems, amalgamated product systems and their index")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Axioms, units, CP validity and morphisms.
    Check(Args),
    /// Covariance kernel and index estimate of a unit set.
    Index(Args),
    /// The Powers block semigroup against the amalgamation of its corners.
    Powers(Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Maximum refinement depth (overrides `max_depth`).
    #[arg(long)]
    depth: Option<u32>,
    /// Residual tolerance (overrides `tolerance.residual_eps`).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

/// Runs one command and returns its report.
pub fn execute(command: &str, cfg: &ExperimentConfig, settings: Settings) -> Result<Report, ConfigError> {
    match command {
        "check" => cmd_check(cfg, settings),
        "index" => cmd_index(cfg, settings),
        "powers" => cmd_powers(cfg, settings),
        other => Err(ConfigError::Invalid(format!("unknown command `{other}`"))),
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    let (name, args) = match &cli.command {
        Command::Check(a) => ("check", a),
        Command::Index(a) => ("index", a),
        Command::Powers(a) => ("powers", a),
    };
    let outcome = config::load(&args.config)
        .and_then(|cfg| Settings::new(&cfg, args.depth, args.tol).map(|s| (cfg, s)))
        .and_then(|(cfg, s)| execute(name, &cfg, s));
    let report = match outcome {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(path) = &args.out {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    }
    match args.format {
        Format::Json => print!("{}", report.to_json()),
        Format::Table => print!("{}", report.to_table()),
    }
    if report.passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

//! `popa`: JSON front end for the popa-core toolkit.

mod commands;
mod input;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

const THREADS_VAR: &str = "POPA_ALGEBRA_THREADS";

#[derive(Debug)]
pub enum CliError {
    /// Bad or unusable input, exit 2.
    Input(String),
    /// A numerical failure with no report, exit 1.
    Failed(String),
}

impl From<popa_core::Error> for CliError {
    fn from(e: popa_core::Error) -> Self {
        use popa_core::Error::*;
        match e {
            DimensionMismatch { .. }
            | InvalidDescriptor(_)
            | InvalidInput { .. }
            | NotDifferentiable
            | NotOmegaHomogeneous
            | UnsupportedDimension(_)
            | UnsupportedAlgebra(_)
            | NotOrthogonalIdempotents
            | ConstraintViolated { .. }
            | UnitNotInGroup => CliError::Input(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "popa",
    version,
    about = "Golab-Schinzel solutions: classify, verify, tilt, solve"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,

    /// Input JSON file.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Report destination; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long = "box-radius", global = true, default_value_t = 0.4)]
    box_radius: f64,
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,
    #[arg(long = "n-roots", global = true, default_value_t = 10)]
    n_roots: usize,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Verb {
    /// Validate a sigma matrix (or a solution) and report its structure.
    Classify,
    /// Sample the GS and Goldie residuals of a solution.
    Verify,
    /// Evaluate T(u) and its radiality defect; input `{solution, u}`.
    Tilt,
    /// Closed-form inverse of T; input `{solution, v}`.
    InvertTilt,
    /// Fixed-point solve of T(u) = v; input `{solution, v}`.
    SolveTilt,
    /// Roots of e^w = 1 + w with positive real part.
    SolveSt,
    /// The root xi of e^{-xi} = xi - 1.
    Xi,
    /// Extract the kernel/range/right-inverse triple and rebuild S from it.
    Wj,
    /// Derived quantities of a solution plus a verify run.
    Report,
}

impl Verb {
    fn needs_input(self) -> bool {
        !matches!(self, Verb::SolveSt | Verb::Xi)
    }
}

pub struct Opts {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub box_radius: f64,
    pub max_iter: Option<usize>,
    pub n_roots: usize,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("{THREADS_VAR}: expected a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Failed(e.to_string()))
}

fn run(cli: &Cli) -> Result<(String, bool), CliError> {
    configure_threads()?;
    let opts = Opts {
        samples: cli.samples,
        seed: cli.seed,
        tol: cli.tol,
        box_radius: cli.box_radius,
        max_iter: cli.max_iter,
        n_roots: cli.n_roots,
    };
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(CliError::Input("--tol must be positive".into()));
    }
    if !(opts.box_radius > 0.0 && opts.box_radius.is_finite()) {
        return Err(CliError::Input("--box-radius must be positive".into()));
    }
    let value = if cli.verb.needs_input() {
        let path = cli
            .input
            .as_ref()
            .ok_or_else(|| CliError::Input("--input is required for this command".into()))?;
        Some(input::read_json(path)?)
    } else {
        None
    };
    let take = || value.clone().expect("input checked above");
    let (report, passed) = match cli.verb {
        Verb::Classify => commands::classify(&opts, take()),
        Verb::Verify => commands::verify(&opts, take()),
        Verb::Tilt => commands::tilt(&opts, take()),
        Verb::InvertTilt => commands::invert_tilt(&opts, take()),
        Verb::SolveTilt => commands::solve_tilt(&opts, take()),
        Verb::SolveSt => commands::solve_st(&opts),
        Verb::Xi => commands::xi(&opts),
        Verb::Wj => commands::wj(&opts, take()),
        Verb::Report => commands::report(&opts, take()),
    }?;
    let text = popa_core::json::to_json_string(&report).map_err(|e| CliError::Failed(e.to_string()))?;
    Ok((text, passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, passed)) => {
            let written = match &cli.output {
                Some(path) => fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("check failed (tol {:e})", cli.tol);
                ExitCode::from(1)
            }
        }
        Err(CliError::Input(msg)) => {
            eprintln!("input error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

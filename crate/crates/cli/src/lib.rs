//! Command-line front end for the `hopfion` library.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage or I/O error,
//! 3 numerical abort.

pub mod analyze;
pub mod args;
pub mod grid;
pub mod output;
pub mod report;
pub mod sample;
pub mod trace;
pub mod verify;

use hopfion::dirac::BispinorKind;
use hopfion::{PacketParams, ToleranceConfig};

pub use args::{Cli, Command};
pub use grid::GridSpec;
pub use report::{Check, ReportBundle, RunReport, Status};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("numerical: {0}")]
    Numerical(#[from] hopfion::Error),
    #[error("numerical: {0}")]
    Aborted(String),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) | CliError::Aborted(_) => 3,
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let common = match &cli.command {
        Command::Sample(a) => &a.common,
        Command::Trace(a) => &a.common,
        Command::Analyze(a) => &a.common,
        Command::Verify(a) => &a.common,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;
    if common.compton {
        print_compton(common);
    }
    pool.install(|| match &cli.command {
        Command::Sample(a) => sample::run(a),
        Command::Trace(a) => trace::run(a),
        Command::Analyze(a) => analyze::run(a),
        Command::Verify(a) => verify::run(a),
    })
}

pub fn params_from(common: &args::Common) -> Result<PacketParams, CliError> {
    PacketParams::new(common.m, common.a, common.l, common.v).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn kind_from(common: &args::Common) -> Result<BispinorKind, CliError> {
    common
        .kind
        .parse()
        .map_err(|e: hopfion::Error| CliError::Usage(e.to_string()))
}

/// Quadrature tolerances with `--tol` as the relative tolerance.
pub fn tolerance_from(common: &args::Common, base: ToleranceConfig) -> Result<ToleranceConfig, CliError> {
    let tol = match common.tol {
        Some(t) => base.with_rel(t),
        None => base,
    };
    tol.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(tol)
}

fn print_compton(common: &args::Common) {
    let lambda = 1.0 / common.m;
    eprintln!(
        "reduced Compton wavelength 1/m = {lambda}; a = {} (1/m); lengths and times scale by m = {}",
        common.a * common.m,
        common.m
    );
}

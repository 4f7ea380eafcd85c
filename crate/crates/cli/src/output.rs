//! CSV and JSON writers. CSV files start with `# metadata: {...}` and
//! optionally `# summary: {...}` comment lines, then the header row.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use hopfion::PacketParams;
use serde::Serialize;
use serde_json::Value;

use crate::args::{Common, Format};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub units: &'static str,
    pub boost: &'static str,
    pub normalization: &'static str,
    pub dp: &'static str,
    pub maxwell_velocity: &'static str,
    pub spreading: &'static str,
}

pub const CONVENTIONS: Conventions = Conventions {
    units: "natural units c = hbar = 1; lengths and times in 1/m when m = 1",
    boost: "s^2 = r^2 - t^2 + a^2 + 2 i a gamma (t - v z)",
    normalization:
        "N^-2 = 2 m pi^2 n! K_{n+2}(2am) / (am)^{n+1}; boosted N^2 divided by sqrt((1 - sigma v)/(1 + sigma v))",
    dp: "central: sqrt(<p^2> - <p_z>^2) with the exact spinor <p_z>; raw sqrt(<p^2>) reported alongside",
    maxwell_velocity: "v_M closed form, the Poynting velocity of conj(F(-r, t))",
    spreading: "<r^2>(t) = A/m^2 + B (a^2 + t^2)",
};

#[derive(Debug, Clone, Serialize)]
pub struct ParamBlock {
    pub m: f64,
    pub a: f64,
    pub l: u32,
    pub v: f64,
    pub kind: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub params: ParamBlock,
    pub conventions: Conventions,
    pub tol: Option<f64>,
    pub rng_seed: u64,
    /// Command-specific settings.
    pub settings: Value,
}

impl Metadata {
    pub fn new(command: &str, common: &Common, params: &PacketParams, settings: Value) -> Self {
        Self {
            tool: "hopfion",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            params: ParamBlock {
                m: params.m,
                a: params.a,
                l: params.l,
                v: params.v,
                kind: common.kind.clone(),
            },
            conventions: CONVENTIONS,
            tol: common.tol,
            rng_seed: common.rng_seed,
            settings,
        }
    }
}

/// One table cell; numbers print in shortest round-trip form.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Num(v) => f.write_str(&fmt_num(*v)),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// Shortest round-trip form with an exponent for very large or small
/// magnitudes; `NaN`, `inf`, `-inf` for non-finite values.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).expect("finite floats serialize")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn numeric_rows(rows: Vec<Vec<f64>>) -> Vec<Vec<Cell>> {
    rows.into_iter()
        .map(|r| r.into_iter().map(Cell::Num).collect())
        .collect()
}

/// A rectangular table plus its metadata and an optional summary block.
#[derive(Debug, Clone, Serialize)]
pub struct Document {
    pub metadata: Metadata,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Document {
    pub fn write_to(&self, format: Format, w: &mut dyn Write) -> Result<(), CliError> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, self).map_err(|e| CliError::Io(e.to_string()))?;
                writeln!(w)?;
            }
            Format::Csv => {
                writeln!(w, "# metadata: {}", compact(&self.metadata)?)?;
                if let Some(s) = &self.summary {
                    writeln!(w, "# summary: {}", compact(s)?)?;
                }
                let mut csv = csv::Writer::from_writer(w);
                csv.write_record(&self.columns).map_err(csv_err)?;
                for row in &self.rows {
                    csv.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
                }
                csv.flush()?;
            }
        }
        Ok(())
    }

    pub fn write(&self, format: Format, out: Option<&Path>) -> Result<(), CliError> {
        with_output(out, |w| self.write_to(format, w))
    }
}

fn compact<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string(v).map_err(|e| CliError::Io(e.to_string()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Run `f` on the file at `out`, or on standard output.
pub fn with_output<F>(out: Option<&Path>, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

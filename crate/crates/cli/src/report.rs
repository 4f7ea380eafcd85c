use std::io::Write;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Measured quantity; `null` in JSON when the computation failed.
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
    #[serde(skip)]
    pub wall_time: f64,
}

impl Check {
    /// Pass when `measured <= tolerance`.
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self::new(name, measured <= tolerance, measured, tolerance, detail)
    }

    pub fn new(name: impl Into<String>, ok: bool, measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: if ok && !measured.is_nan() {
                Status::Pass
            } else {
                Status::Fail
            },
            measured,
            tolerance,
            detail: detail.into(),
            wall_time: 0.0,
        }
    }

    pub fn error(name: impl Into<String>, tolerance: f64, err: impl std::fmt::Display) -> Self {
        Self::new(name, false, f64::NAN, tolerance, format!("error: {err}"))
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Outcome of one suite or sweep. The body excludes wall times, so two runs
/// with the same inputs serialize identically.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub suite: String,
    pub status: Status,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub wall_time: f64,
}

impl RunReport {
    pub fn new(suite: impl Into<String>) -> Self {
        Self {
            suite: suite.into(),
            status: Status::Pass,
            checks: Vec::new(),
            wall_time: 0.0,
        }
    }

    pub fn push(&mut self, check: Check) {
        if !check.passed() {
            self.status = Status::Fail;
        }
        self.checks.push(check);
    }

    /// Time `f` and record its check.
    pub fn run<F: FnOnce() -> Check>(&mut self, f: F) {
        let start = Instant::now();
        let mut c = f();
        c.wall_time = start.elapsed().as_secs_f64();
        self.push(c);
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn timing(&self) -> Value {
        let checks: serde_json::Map<String, Value> = self
            .checks
            .iter()
            .map(|c| (c.name.clone(), json!(c.wall_time)))
            .collect();
        json!({ "suite": self.suite, "total_s": self.wall_time, "checks": checks })
    }
}

/// Reports from several suites with a shared metadata block.
#[derive(Debug, Clone, Serialize)]
pub struct ReportBundle {
    pub metadata: Value,
    pub status: Status,
    pub reports: Vec<RunReport>,
}

impl ReportBundle {
    pub fn new(metadata: Value, reports: Vec<RunReport>) -> Self {
        let status = if reports.iter().all(RunReport::passed) {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            metadata,
            status,
            reports,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Deterministic part of the report.
    pub fn body_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))
    }

    /// `{"report": body, "timing": [...]}`; only `timing` varies between runs.
    pub fn write_to(&self, w: &mut dyn Write) -> Result<(), CliError> {
        let timing: Vec<Value> = self.reports.iter().map(RunReport::timing).collect();
        let doc = json!({ "report": self, "timing": timing });
        serde_json::to_writer_pretty(&mut *w, &doc).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    }

    /// One line per check on standard error.
    pub fn print_summary(&self) {
        for r in &self.reports {
            for c in &r.checks {
                let tag = if c.passed() { "PASS" } else { "FAIL" };
                eprintln!(
                    "{tag} {}/{}: {:e} (tol {:e}) {}",
                    r.suite, c.name, c.measured, c.tolerance, c.detail
                );
            }
        }
    }
}

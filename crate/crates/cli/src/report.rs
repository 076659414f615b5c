use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::suites::Direction;

pub const SCHEMA_VERSION: u32 = 1;

/// Decade histogram of residual magnitudes. Bin `k` covers
/// `[lower_edges[k], lower_edges[k+1])`; the first edge is `0` and the last
/// bin is open above `1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lower_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

const LOWEST_DECADE: i32 = -16;

impl Histogram {
    pub fn of(values: &[f64]) -> Self {
        let mut lower_edges = vec![0.0];
        lower_edges.extend((LOWEST_DECADE..=0).map(|e| 10f64.powi(e)));
        let mut counts = vec![0; lower_edges.len()];
        for v in values {
            let v = v.abs();
            let bin = lower_edges.iter().rposition(|&edge| v >= edge).unwrap_or(0);
            counts[bin] += 1;
        }
        Self { lower_edges, counts }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub direction: Direction,
    pub tolerance: f64,
    pub pass: bool,
    pub max_residual: f64,
    pub min_residual: f64,
    pub histogram: Histogram,
    /// One residual per sample, in sample order.
    pub residuals: Vec<f64>,
}

impl CheckReport {
    pub fn new(name: String, direction: Direction, tolerance: f64, residuals: Vec<f64>) -> Self {
        let max_residual = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min_residual = residuals.iter().copied().fold(f64::INFINITY, f64::min);
        let pass = !residuals.is_empty() && residuals.iter().all(|&r| direction.passes(r, tolerance));
        Self {
            name,
            direction,
            tolerance,
            pass,
            max_residual,
            min_residual,
            histogram: Histogram::of(&residuals),
            residuals,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub anchor: String,
    pub tolerance: f64,
    pub pass: bool,
    /// Largest residual over the non-control checks.
    pub max_residual: Option<f64>,
    pub seed: u64,
    pub sample_indices: Vec<usize>,
    pub checks: Vec<CheckReport>,
    pub errors: Vec<String>,
    pub wall_time_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub config: RunConfig,
    pub pass: bool,
    pub suites: Vec<SuiteReport>,
    pub wall_time_seconds: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot write csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Serialize)]
struct CsvRow<'a> {
    suite: &'a str,
    sample_index: usize,
    residual: f64,
    tolerance: f64,
    pass: bool,
    check: &'a str,
}

impl Report {
    /// The same report with every timing field zeroed.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.wall_time_seconds = 0.0;
        for s in &mut r.suites {
            s.wall_time_seconds = 0.0;
        }
        r
    }

    pub fn to_json(&self) -> Result<String, ReportError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ReportError> {
        let mut w = csv::Writer::from_writer(out);
        for s in &self.suites {
            for c in &s.checks {
                for (&index, &residual) in s.sample_indices.iter().zip(&c.residuals) {
                    w.serialize(CsvRow {
                        suite: &s.suite,
                        sample_index: index,
                        residual,
                        tolerance: c.tolerance,
                        pass: c.direction.passes(residual, c.tolerance),
                        check: &c.name,
                    })?;
                }
            }
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn save_json(&self, path: &Path) -> Result<(), ReportError> {
        std::fs::write(path, self.to_json()?).map_err(|source| ReportError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), ReportError> {
        let file = std::fs::File::create(path).map_err(|source| ReportError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// One line per suite and check.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let verdict = if s.pass { "PASS" } else { "FAIL" };
            let max = s.max_residual.map_or("-".to_string(), |r| format!("{r:.3e}"));
            out.push_str(&format!(
                "{verdict} {:<14} max residual {max} (tol {:.0e}) [{}]\n",
                s.suite, s.tolerance, s.anchor
            ));
            for c in &s.checks {
                let mark = if c.pass { "ok " } else { "BAD" };
                let (op, value) = match c.direction {
                    Direction::AtMost => ("<=", c.max_residual),
                    Direction::AtLeast => (">=", c.min_residual),
                };
                out.push_str(&format!(
                    "    {mark} {:<32} {value:.3e} {op} {:.0e}\n",
                    c.name, c.tolerance
                ));
            }
            for e in &s.errors {
                out.push_str(&format!("    error: {e}\n"));
            }
        }
        let total = if self.pass { "all suites passed" } else { "some suites failed" };
        out.push_str(&format!("{total} in {:.2}s\n", self.wall_time_seconds));
        out
    }
}

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::{ExperimentConfig, Result, VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, max_residual: f64, tol: f64) -> Self {
        Self { name: name.into(), max_residual, tol, pass: max_residual < tol }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct JsonReport {
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub version: &'static str,
}

impl JsonReport {
    pub fn new(config: ExperimentConfig, checks: Vec<Check>) -> Self {
        Self { config, checks, version: VERSION }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Writes rows as CSV (header from the field names) or as a JSON array.
pub fn write_rows<R: Serialize>(rows: &[R], format: Format, out: Option<&Path>) -> Result<()> {
    let mut w = sink(out)?;
    match format {
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            for r in rows {
                csv.serialize(r)?;
            }
            csv.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, rows)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Writes a JSON document, or for CSV a flat `name,max_residual,tol,pass`
/// table of the checks.
pub fn write_report(report: &JsonReport, format: Format, out: Option<&Path>) -> Result<()> {
    match format {
        Format::Json => {
            let mut w = sink(out)?;
            serde_json::to_writer_pretty(&mut w, report)?;
            writeln!(w)?;
            Ok(())
        }
        Format::Csv => write_rows(&report.checks, Format::Csv, out),
    }
}

pub fn write_json<V: Serialize>(value: &V, out: Option<&Path>) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

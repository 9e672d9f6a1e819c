//! Experiment harness: axiom verification, the two limit sweeps, the
//! boundary sweep and polytope reports. Every command returns plain data;
//! `main.rs` handles flags, output files and exit codes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod complex;
pub mod kahler;
pub mod output;
pub mod polytope_report;
pub mod verify;

use std::path::PathBuf;

use serde::Serialize;

pub use boundary::{cmd_boundary, BoundaryRow};
pub use complex::{cmd_limit_complex, ComplexRow};
pub use kahler::{cmd_limit_kahler, KahlerRow};
pub use output::{Check, Format, JsonReport};
pub use polytope_report::{cmd_polytope_report, PolytopeReport};
pub use verify::cmd_verify;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] wsdlab_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// `2` for infeasible or invalid configurations, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        use wsdlab_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Infeasible { .. } | E::InvalidDimension(_) | E::InvalidParameter(_)) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub rho1: f64,
    pub rho2: f64,
    /// Sweep parameter; its meaning depends on the command.
    pub grid: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 2,
            rho1: 1.0,
            rho2: 0.5,
            grid: Vec::new(),
            samples: 100,
            seed: 0,
            tol: 1e-8,
            out: None,
            format: Format::Csv,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(CliError::Config(format!("n must be >= 1, got {}", self.n)));
        }
        if self.samples == 0 {
            return Err(CliError::Config("samples must be positive".into()));
        }
        if !(self.rho1 > 0.0) || !self.rho1.is_finite() {
            return Err(CliError::Config(format!("rho1 must be positive, got {}", self.rho1)));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::Config(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    pub fn grid_or(&self, default: &[f64]) -> Vec<f64> {
        if self.grid.is_empty() {
            default.to_vec()
        } else {
            self.grid.clone()
        }
    }
}

/// Parses `a,b,c` or `log:lo:hi:count` (powers of ten from `lo` to `hi`).
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Config(format!("cannot parse grid '{s}'"));
    if let Some(rest) = s.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].parse().map_err(|_| bad())?;
        let k: usize = parts[2].parse().map_err(|_| bad())?;
        if k < 2 {
            return Ok(vec![10f64.powf(lo)]);
        }
        return Ok((0..k).map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (k - 1) as f64)).collect());
    }
    let v: std::result::Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    let v = v.map_err(|_| bad())?;
    if v.is_empty() {
        return Err(bad());
    }
    Ok(v)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Whether each entry is below its predecessor by more than `rel_floor`
/// times the predecessor's magnitude, so round-off does not count as a
/// decrease.
pub fn strictly_decreasing(values: &[f64], rel_floor: f64) -> bool {
    values.windows(2).all(|w| w[1] < w[0] - rel_floor * w[0].abs())
}

/// `(max - min) / min`.
pub fn relative_spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1, 2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        let g = parse_grid("log:0:3:4").unwrap();
        assert!(g.iter().zip([1.0, 10.0, 100.0, 1000.0]).all(|(a, b)| (a - b).abs() < 1e-9 * b));
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn trend_helpers() {
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0], 1e-12));
        assert!(!strictly_decreasing(&[1.0, 1.0 - 1e-16], 1e-12));
        assert!((loglog_slope(&[1.0, 4.0, 16.0], &[1.0, 2.0, 4.0]) - 0.5).abs() < 1e-12);
        assert!((relative_spread(&[1.0, 1.1, 1.05]) - 0.1).abs() < 1e-12);
    }
}

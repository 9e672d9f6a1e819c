use nalgebra::DVector;
use serde::Serialize;
use wsdlab_core::ambient::{eta_index, metric_matrix, theta_index};
use wsdlab_core::maps::{alpha_deform, psi_scale_reduced};
use wsdlab_core::reduction::{sample_base, sample_reduced_points, threshold_rho2_sq, LevelSetSpec};

use crate::{loglog_slope, ExperimentConfig, Result, VERSION};

/// Long-format row: one measured `quantity` at one parameter value on one
/// side of the deformation square.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryRow {
    pub side: &'static str,
    pub n: usize,
    pub rho1: f64,
    pub rho2_sq: f64,
    pub param_name: &'static str,
    pub param: f64,
    pub quantity: &'static str,
    pub value: f64,
    pub seed: u64,
    pub version: &'static str,
}

pub const DEFAULT_EPS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
pub const SHRINK_T: [f64; 5] = [1.0, 0.5, 0.25, 0.125, 0.0625];
pub const GROW_T: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];

fn base_diameter(points: &[DVector<f64>]) -> f64 {
    let mut d = 0.0f64;
    for a in points {
        for b in points {
            d = d.max((a - b).norm());
        }
    }
    d
}

fn normalized_base(spec: &LevelSetSpec<f64>, count: usize, seed: u64) -> Result<Vec<DVector<f64>>> {
    let rho1 = spec.rho1();
    Ok(sample_base(spec, count, seed)?.into_iter().map(|r| r / rho1).collect())
}

fn shape_drift(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max)
}

/// The three boundary sides: `T` pinches the base as `ρ2² → threshold`,
/// `B` follows `α_t` with `t → 0`, `A` follows `α_t` with `t → ∞`.
pub fn cmd_boundary(cfg: &ExperimentConfig) -> Result<Vec<BoundaryRow>> {
    cfg.validate()?;
    let n = cfg.n;
    let thr: f64 = threshold_rho2_sq(n);
    let row = |side, rho1: f64, rho2_sq: f64, param_name, param, quantity, value| BoundaryRow {
        side,
        n,
        rho1,
        rho2_sq,
        param_name,
        param,
        quantity,
        value,
        seed: cfg.seed,
        version: VERSION,
    };
    let mut rows = Vec::new();

    let eps = cfg.grid_or(&DEFAULT_EPS);
    let mut diams = Vec::with_capacity(eps.len());
    for &e in &eps {
        let rho2_sq = thr * (1.0 + e);
        let spec = LevelSetSpec::from_rho(n, cfg.rho1, rho2_sq.sqrt())?;
        let d = base_diameter(&normalized_base(&spec, cfg.samples, cfg.seed)?);
        diams.push(d);
        rows.push(row("T", cfg.rho1, rho2_sq, "eps", e, "base_diameter_over_rho1", d));
    }
    if eps.len() >= 2 {
        rows.push(row("T", cfg.rho1, f64::NAN, "fit", 0.0, "pinch_exponent", loglog_slope(&eps, &diams)));
    }

    let spec = LevelSetSpec::<f64>::from_rho(n, cfg.rho1, cfg.rho2)?;
    spec.require_regular()?;
    let rho2_sq = cfg.rho2 * cfg.rho2;
    let reference = normalized_base(&spec, cfg.samples, cfg.seed)?;
    let points = sample_reduced_points(&spec, cfg.samples, cfg.seed)?;
    let mut previous: Option<f64> = None;
    for &t in &SHRINK_T {
        let spec_t = alpha_deform(&spec, t)?;
        let mut theta = 0.0f64;
        let mut eta = 0.0f64;
        for p in &points {
            let q = psi_scale_reduced(p, t)?;
            let g = metric_matrix(q.base_r.as_slice());
            for i in 0..=n {
                theta = theta.max(g[(theta_index(n, i), theta_index(n, i))]);
                eta = eta.max(g[(eta_index(n, i), eta_index(n, i))]);
            }
        }
        let ratio = theta / eta;
        let rho1_t = spec_t.rho1();
        rows.push(row("B", rho1_t, rho2_sq, "t", t, "theta_eta_ratio", ratio));
        if let Some(prev) = previous {
            rows.push(row("B", rho1_t, rho2_sq, "t", t, "ratio_step_factor", prev / ratio));
        }
        previous = Some(ratio);
        let drift = shape_drift(&reference, &normalized_base(&spec_t, cfg.samples, cfg.seed)?);
        rows.push(row("B", rho1_t, rho2_sq, "t", t, "shape_drift", drift));
    }

    for &t in &GROW_T {
        let spec_t = alpha_deform(&spec, t)?;
        let base = normalized_base(&spec_t, cfg.samples, cfg.seed)?;
        let sums: Vec<f64> = base.iter().map(|r| r.sum()).collect();
        let rho1_t = spec_t.rho1();
        rows.push(row("A", rho1_t, rho2_sq, "t", t, "sum_r_over_rho1_min", sums.iter().copied().fold(f64::INFINITY, f64::min)));
        rows.push(row("A", rho1_t, rho2_sq, "t", t, "sum_r_over_rho1_max", sums.iter().copied().fold(0.0, f64::max)));
        rows.push(row("A", rho1_t, rho2_sq, "t", t, "shape_drift", shape_drift(&reference, &base)));
    }
    Ok(rows)
}

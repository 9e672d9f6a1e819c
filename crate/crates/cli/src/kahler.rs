use rayon::prelude::*;
use serde::Serialize;
use wsdlab_core::maps::{pi1_image_residual, project_pi1};
use wsdlab_core::metgeo::{
    anticanonical_sample, flat_torus_diameter, hausdorff_distance, paper_fiber_bound, pi1_fiber_torus, Chart,
    DiameterMode, FiniteMetricSample, SampleTarget,
};
use wsdlab_core::reduction::{sample_reduced_points, LevelSetSpec};

use crate::{CliError, ExperimentConfig, Result, VERSION};

/// One row of the large-Kähler sweep.
///
/// `hausdorff_normalized` is `2H / (diam_image + diam_anticanonical)` for the
/// `π1`-image against `{∏ z_i = 0}`; `ngh_estimate` adds the fiber diameter
/// to `H` as a proxy for comparing `X` itself with the divisor.
#[derive(Clone, Debug, Serialize)]
pub struct KahlerRow {
    pub n: usize,
    pub rho1: f64,
    pub rho2: f64,
    pub samples: usize,
    pub seed: u64,
    pub version: &'static str,
    pub fiber_mode: &'static str,
    pub fiber_diam_max: f64,
    pub paper_bound: f64,
    pub bound_ratio: f64,
    pub hausdorff_fs: f64,
    pub diam_image: f64,
    pub diam_anticanonical: f64,
    pub hausdorff_normalized: f64,
    pub ngh_estimate: f64,
    pub pi1_residual_max: f64,
}

pub(crate) fn fiber_mode(n: usize) -> (DiameterMode, &'static str) {
    if n <= 3 {
        (DiameterMode::Exact, "exact")
    } else {
        (DiameterMode::UpperBound, "upper_bound")
    }
}

pub fn kahler_row(n: usize, rho1: f64, rho2: f64, samples: usize, seed: u64) -> Result<KahlerRow> {
    let spec = LevelSetSpec::<f64>::from_rho(n, rho1, rho2)?;
    spec.require_regular()?;
    let points = sample_reduced_points(&spec, samples, seed)?;
    let (mode, mode_name) = fiber_mode(n);
    let mut fiber = 0.0f64;
    for p in &points {
        fiber = fiber.max(flat_torus_diameter(&pi1_fiber_torus(p), mode)?.value);
    }
    let lambda = rho1 * rho1;
    let images: Vec<_> = points.iter().map(|p| project_pi1(p).z).collect();
    let pi1_residual_max = images.iter().map(|z| pi1_image_residual(z, rho2)).fold(0.0, f64::max);
    let image = FiniteMetricSample::from_points(Chart::Projective { n, lambda }, images)?;
    let anti = anticanonical_sample::<f64>(n, SampleTarget::Projective { lambda }, samples, seed.wrapping_add(1))?;
    let h = hausdorff_distance(&image, &anti)?;
    let (di, da) = (image.diameter()?, anti.diameter()?);
    let bound = paper_fiber_bound(n, rho1, rho2);
    Ok(KahlerRow {
        n,
        rho1,
        rho2,
        samples,
        seed,
        version: VERSION,
        fiber_mode: mode_name,
        fiber_diam_max: fiber,
        paper_bound: bound,
        bound_ratio: fiber / bound,
        hausdorff_fs: h,
        diam_image: di,
        diam_anticanonical: da,
        hausdorff_normalized: 2.0 * h / (di + da),
        ngh_estimate: 2.0 * (fiber + h) / (di + da),
        pi1_residual_max,
    })
}

/// Sweeps `ρ1` over `cfg.grid` (default `1, 10, 100, 1000`) at fixed `ρ2`.
pub fn cmd_limit_kahler(cfg: &ExperimentConfig) -> Result<Vec<KahlerRow>> {
    cfg.validate()?;
    let grid = cfg.grid_or(&[1.0, 10.0, 100.0, 1000.0]);
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|&x| !(x > 0.0)) {
        return Err(CliError::Config("rho1 grid must be positive and increasing".into()));
    }
    grid.par_iter().map(|&rho1| kahler_row(cfg.n, rho1, cfg.rho2, cfg.samples, cfg.seed)).collect()
}

use nalgebra::DVector;
use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;
use wsdlab_core::maps::{pi2_image_residual, project_pi2};
use wsdlab_core::metgeo::{
    anticanonical_points, flat_torus_diameter, hausdorff_distance, pi2_fiber_torus, Chart, FiniteMetricSample,
    FlatTorusSpec, SampleTarget,
};
use wsdlab_core::reduction::{sample_reduced_points, section_maps, LevelSetSpec};

use crate::kahler::fiber_mode;
use crate::{CliError, ExperimentConfig, Result, VERSION};

/// One row of the large-complex-structure sweep.
///
/// The `deg_*` columns use the degenerate metric
/// `Σ 16π⁴ρ1²ρ2² r_i² e^{-4π²ρ2²r_i²} dr_i² + e^{4π²ρ2²r_i²}/(4π²ρ2⁴) dη_i²`
/// with `r_i = |z_i|/ρ2`: `deg_radial_hausdorff` compares image and divisor
/// along the radial directions (angles held fixed), `deg_eta_diameter` is the
/// largest diameter of the `η̄`-torus over the image samples.
#[derive(Clone, Debug, Serialize)]
pub struct ComplexRow {
    pub n: usize,
    pub rho1: f64,
    pub rho2: f64,
    pub rho1_rho2: f64,
    pub samples: usize,
    pub seed: u64,
    pub version: &'static str,
    pub fiber_mode: &'static str,
    pub fiber_diam_max: f64,
    pub fiber_over_rho1: f64,
    pub hausdorff_hn: f64,
    pub diam_image: f64,
    pub diam_anticanonical: f64,
    pub hausdorff_normalized: f64,
    pub pi2_residual_max: f64,
    pub deg_radial_hausdorff: f64,
    pub deg_eta_diameter: f64,
    pub deg_ratio: f64,
}

/// Radial coordinates `(ρ1/ρ2) e^{-2π²ρ2² r_i²}`, along which the degenerate
/// metric is flat.
fn radial_embedding(z: &[Complex<f64>], rho1: f64, rho2: f64) -> Vec<Complex<f64>> {
    let c = 2.0 * std::f64::consts::PI.powi(2) * rho2 * rho2;
    z.iter()
        .map(|w| {
            let r = w.norm() / rho2;
            Complex::new(rho1 / rho2 * (-c * r * r).exp(), 0.0)
        })
        .collect()
}

pub fn complex_row(n: usize, rho1: f64, rho2: f64, samples: usize, seed: u64) -> Result<ComplexRow> {
    let spec = LevelSetSpec::<f64>::from_rho(n, rho1, rho2)?;
    spec.require_regular()?;
    let points = sample_reduced_points(&spec, samples, seed)?;
    let (mode, mode_name) = fiber_mode(n);
    let mut fiber = 0.0f64;
    for p in &points {
        fiber = fiber.max(flat_torus_diameter(&pi2_fiber_torus(p), mode)?.value);
    }
    let lambda = rho2 * rho2;
    let images = points.iter().map(|p| project_pi2(p).map(|h| h.z)).collect::<wsdlab_core::Result<Vec<_>>>()?;
    let pi2_residual_max = images.iter().map(|z| pi2_image_residual(z)).fold(0.0, f64::max);
    let anti_points = anticanonical_points::<f64>(n, lambda, samples, seed.wrapping_add(1));
    let chart = SampleTarget::Quotient { lambda }.chart(n);
    let image = FiniteMetricSample::from_points(chart.clone(), images.clone())?;
    let anti = FiniteMetricSample::from_points(chart, anti_points.clone())?;
    let h = hausdorff_distance(&image, &anti)?;
    let (di, da) = (image.diameter()?, anti.diameter()?);

    let euclid = Chart::Euclidean { dim: n + 1 };
    let radial = |pts: &[Vec<Complex<f64>>]| -> Vec<Vec<Complex<f64>>> {
        pts.iter().map(|z| radial_embedding(z, rho1, rho2)).collect()
    };
    let deg_image = FiniteMetricSample::from_points(euclid.clone(), radial(&images))?;
    let deg_anti = FiniteMetricSample::from_points(euclid, radial(&anti_points))?;
    let deg_h = hausdorff_distance(&deg_image, &deg_anti)?;
    let (_, eta_map) = section_maps(n)?;
    let basis = eta_map.to_real::<f64>() / (n + 1) as f64;
    let four_pi_sq = 4.0 * std::f64::consts::PI.powi(2);
    let mut eta_diam = 0.0f64;
    for z in &images {
        let weights =
            DVector::from_iterator(n + 1, z.iter().map(|w| (four_pi_sq * w.norm_sqr()).exp() / (four_pi_sq * lambda * lambda)));
        let torus = FlatTorusSpec {
            lattice_basis: basis.clone(),
            metric_diag: weights,
            collapsed: Some(DVector::repeat(n + 1, 1.0)),
        };
        eta_diam = eta_diam.max(flat_torus_diameter(&torus, mode)?.value);
    }

    Ok(ComplexRow {
        n,
        rho1,
        rho2,
        rho1_rho2: rho1 * rho2,
        samples,
        seed,
        version: VERSION,
        fiber_mode: mode_name,
        fiber_diam_max: fiber,
        fiber_over_rho1: fiber / rho1,
        hausdorff_hn: h,
        diam_image: di,
        diam_anticanonical: da,
        hausdorff_normalized: 2.0 * h / (di + da),
        pi2_residual_max,
        deg_radial_hausdorff: deg_h,
        deg_eta_diameter: eta_diam,
        deg_ratio: deg_h / eta_diam,
    })
}

/// Sweeps `ρ2` over `cfg.grid` (default `0.4, 0.5, 0.6, 0.7`) with
/// `ρ1 = cfg.rho1 · (ρ2_0/ρ2)²`, so `ρ1ρ2` decreases along the grid.
pub fn cmd_limit_complex(cfg: &ExperimentConfig) -> Result<Vec<ComplexRow>> {
    cfg.validate()?;
    let grid = cfg.grid_or(&[0.4, 0.5, 0.6, 0.7]);
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|&x| !(x > 0.0)) {
        return Err(CliError::Config("rho2 grid must be positive and increasing".into()));
    }
    let r0 = grid[0];
    grid.par_iter()
        .map(|&rho2| complex_row(cfg.n, cfg.rho1 * (r0 / rho2).powi(2), rho2, cfg.samples, cfg.seed))
        .collect()
}

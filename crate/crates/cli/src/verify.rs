use rayon::prelude::*;
use wsdlab_core::ambient::{exterior_derivative_residual, leaf_volume, FormId};
use wsdlab_core::reduction::{
    induced_structure_at, omega_d_degenerate_block, reduced_tangent_frame, sample_reduced_points,
    tangent_frame_residual, verify_wsd_axioms, LevelSetSpec,
};

use crate::output::{Check, JsonReport};
use crate::{ExperimentConfig, Result};

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-6;
pub const PAIRING_TOL: f64 = 1e-9;
pub const AIJ_TOL: f64 = 1e-10;
pub const LEAF_TOL: f64 = 1e-10;

#[derive(Default, Clone, Copy)]
struct Maxima {
    axioms: f64,
    degenerate_dim: f64,
    inverse_margin: f64,
    tangency: f64,
    moment: f64,
    aij_agreement: f64,
    aij_expansion: f64,
    pairing_paper: f64,
    pairing_corrected: f64,
    remark_norm: f64,
    leaf: f64,
    closed: [f64; 3],
}

impl Maxima {
    fn merge(self, o: Self) -> Self {
        Self {
            axioms: self.axioms.max(o.axioms),
            degenerate_dim: self.degenerate_dim.max(o.degenerate_dim),
            inverse_margin: self.inverse_margin.max(o.inverse_margin),
            tangency: self.tangency.max(o.tangency),
            moment: self.moment.max(o.moment),
            aij_agreement: self.aij_agreement.max(o.aij_agreement),
            aij_expansion: self.aij_expansion.max(o.aij_expansion),
            pairing_paper: self.pairing_paper.max(o.pairing_paper),
            pairing_corrected: self.pairing_corrected.max(o.pairing_corrected),
            remark_norm: self.remark_norm.max(o.remark_norm),
            leaf: self.leaf.max(o.leaf),
            closed: [0, 1, 2].map(|i| self.closed[i].max(o.closed[i])),
        }
    }
}

/// Samples the reduced manifold and checks the WSD structure, the
/// degenerate block, unit leaf volume and closedness of the three forms.
pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<JsonReport> {
    cfg.validate()?;
    let spec = LevelSetSpec::<f64>::from_rho(cfg.n, cfg.rho1, cfg.rho2)?;
    spec.require_regular()?;
    let points = sample_reduced_points(&spec, cfg.samples, cfg.seed)?;
    let k = (cfg.n + 1) as f64;

    let per_point: Vec<Maxima> = points
        .par_iter()
        .map(|p| -> Result<Maxima> {
            let s = induced_structure_at(p)?;
            let rep = verify_wsd_axioms(&s, cfg.tol);
            let frame = reduced_tangent_frame(p)?;
            let block = omega_d_degenerate_block(p)?;
            let amb = p.embed();
            let closed = [FormId::Omega1, FormId::Omega2, FormId::OmegaD]
                .map(|f| exterior_derivative_residual(f, &amb, FD_STEP).map(|c| c.residual));
            let [c1, c2, cd] = closed;
            let corrected = k * (k * k - block.product) / block.product;
            Ok(Maxima {
                axioms: rep.max_residual(),
                degenerate_dim: (rep.degenerate_dim as f64 - rep.expected_degenerate_dim as f64).abs(),
                inverse_margin: 1.0 / rep.omega_d_margin,
                tangency: tangent_frame_residual(&frame, p),
                moment: p.moment_residual(),
                aij_agreement: block.agreement,
                aij_expansion: block.expansion_residual,
                pairing_paper: block.pairing_residual(),
                pairing_corrected: (block.pairing_direct - corrected).abs(),
                remark_norm: block.norm_residual(),
                leaf: (leaf_volume(&amb) - 1.0).abs(),
                closed: [c1?, c2?, cd?],
            })
        })
        .collect::<Result<_>>()?;
    let m = per_point.into_iter().fold(Maxima::default(), Maxima::merge);

    let checks = vec![
        Check::new("wsd_axioms", m.axioms, cfg.tol),
        Check::new("degenerate_dimension", m.degenerate_dim, 0.5),
        Check::new("omega_d_inverse_margin", m.inverse_margin, 1.0 / cfg.tol),
        Check::new("frame_tangency", m.tangency, cfg.tol),
        Check::new("moment_constraints", m.moment, cfg.tol),
        Check::new("a_ij_closed_vs_linear", m.aij_agreement, AIJ_TOL),
        Check::new("a_ij_expansion", m.aij_expansion, AIJ_TOL),
        Check::new("degenerate_pairing_formula", m.pairing_paper, PAIRING_TOL),
        Check::new("degenerate_pairing_corrected", m.pairing_corrected, PAIRING_TOL),
        Check::new("remark_norm_formula", m.remark_norm, PAIRING_TOL),
        Check::new("leaf_volume", m.leaf, LEAF_TOL),
        Check::new("closedness_omega1", m.closed[0], FD_TOL),
        Check::new("closedness_omega2", m.closed[1], FD_TOL),
        Check::new("closedness_omegaD", m.closed[2], FD_TOL),
    ];
    Ok(JsonReport::new(cfg.clone(), checks))
}

use serde::Serialize;
use wsdlab_core::polytope::{has_property_sd, lattice_maps, simplex_pair, verify_duality_identities, IntMatrix};

use crate::{CliError, Result, VERSION};

#[derive(Clone, Debug, Serialize)]
pub struct NamedMatrix {
    pub name: &'static str,
    pub rows: Vec<Vec<i128>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelSummary {
    pub torsion_invariants: Vec<i128>,
    pub connected_rank: usize,
    /// Decimal string; overflows nothing for large `n`.
    pub order: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolytopeReport {
    pub n: usize,
    pub vertices: Vec<Vec<i128>>,
    pub dual_vertices: Vec<Vec<i128>>,
    pub maps: Vec<NamedMatrix>,
    pub composite: Vec<Vec<i128>>,
    pub composite_swapped: Vec<Vec<i128>>,
    pub ranks: [usize; 4],
    pub kernel: KernelSummary,
    pub identities_hold: bool,
    pub sd: bool,
    pub sd_diagnostic: String,
    pub version: &'static str,
}

fn rows(m: &IntMatrix<i128>) -> Vec<Vec<i128>> {
    m.to_rows()
}

/// Lattice maps, kernel of the composite torus morphism, the duality
/// identities and the SD verdict for the simplex pair in dimension `n`.
pub fn cmd_polytope_report(n: usize) -> Result<PolytopeReport> {
    if n == 0 {
        return Err(CliError::Config("polytope dimension must be at least 1".into()));
    }
    let (delta, dual) = simplex_pair::<i128>(n)?;
    let maps = lattice_maps::<i128>(n)?;
    let duality = verify_duality_identities::<i128>(n)?;
    let sd = has_property_sd(&delta)?;
    Ok(PolytopeReport {
        n,
        vertices: delta.vertices().to_vec(),
        dual_vertices: dual.vertices().to_vec(),
        maps: maps.all().iter().map(|m| NamedMatrix { name: m.role.name(), rows: rows(&m.matrix) }).collect(),
        composite: rows(&duality.composite),
        composite_swapped: rows(&duality.composite_swapped),
        ranks: duality.ranks,
        kernel: KernelSummary {
            torsion_invariants: duality.kernel.torsion_invariants.clone(),
            connected_rank: duality.kernel.connected_rank,
            order: duality.kernel_order.to_string(),
        },
        identities_hold: true,
        sd: sd.holds,
        sd_diagnostic: sd.diagnostic,
        version: VERSION,
    })
}

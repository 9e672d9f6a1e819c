//! Exact algebra for the polytope pair of `CP^n`: vertex lists, the four
//! lattice maps, kernels of the induced torus morphisms and the property-SD
//! decision procedure. Everything here is integer or rational arithmetic.

mod dual;
mod kernel;
mod matrix;

pub use dual::{facets, DualOutcome, Facet, Rational};
pub use kernel::{torus_kernel, GroupOrder, SubgroupDescription};
pub use matrix::{smith_normal_form, IntMatrix, Snf};

use crate::error::{Error, Result};
use crate::scalar::Int;

/// A lattice polytope given by its vertex list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope<I> {
    dim: usize,
    vertices: Vec<Vec<I>>,
}

impl<I: Int> Polytope<I> {
    /// Validates distinctness and full-dimensionality.
    pub fn new(vertices: Vec<Vec<I>>) -> Result<Self> {
        let dim = vertices.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::InvalidPolytope("no vertices or zero ambient dimension".into()));
        }
        if vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidPolytope("vertices of mixed dimension".into()));
        }
        for i in 0..vertices.len() {
            if vertices[i + 1..].contains(&vertices[i]) {
                return Err(Error::InvalidPolytope(format!("repeated vertex {:?}", vertices[i])));
            }
        }
        let span = affine_span_dim(&vertices);
        if span != dim {
            return Err(Error::NotFullDimensional { span, ambient: dim });
        }
        Ok(Self { dim, vertices })
    }

    pub fn from_i64(vertices: &[&[i64]]) -> Result<Self> {
        Self::new(
            vertices
                .iter()
                .map(|v| v.iter().map(|&x| I::from_i64(x).expect("overflow")).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<I>] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
}

fn affine_span_dim<I: Int>(vertices: &[Vec<I>]) -> usize {
    let Some(base) = vertices.first() else { return 0 };
    let diffs: Vec<Vec<Rational<I>>> = vertices[1..]
        .iter()
        .map(|v| v.iter().zip(base).map(|(a, b)| Rational::from_integer(a.clone() - b.clone())).collect())
        .collect();
    if diffs.is_empty() {
        0
    } else {
        dual::rank_of(&diffs)
    }
}

fn int<I: Int>(x: i64) -> I {
    I::from_i64(x).expect("integer overflow")
}

/// The simplex of `CP^n` and its polar dual, with the vertex order
/// `v_1 = (n,-1,..,-1), .., v_{n+1} = (-1,..,-1)` and
/// `u_1 = e_1, .., u_n = e_n, u_{n+1} = (-1,..,-1)`.
pub fn simplex_pair<I: Int>(n: usize) -> Result<(Polytope<I>, Polytope<I>)> {
    if n < 1 {
        return Err(Error::InvalidDimension(format!("simplex dimension must be >= 1, got {n}")));
    }
    let nn = n as i64;
    let mut delta = Vec::with_capacity(n + 1);
    let mut dual = Vec::with_capacity(n + 1);
    for i in 0..n {
        delta.push((0..n).map(|j| int(if i == j { nn } else { -1 })).collect());
        dual.push((0..n).map(|j| int(i64::from(i == j))).collect());
    }
    delta.push(vec![int(-1); n]);
    dual.push(vec![int(-1); n]);
    Ok((Polytope::new(delta)?, Polytope::new(dual)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MapRole {
    /// `F_Δ : R^d -> R^n`, columns are the vertices of the dual polytope.
    Forward,
    /// `F_Δ* : R^d -> R^n`, columns are the vertices of the polytope.
    DualForward,
    /// Transpose of `Forward`.
    ForwardTranspose,
    /// Transpose of `DualForward`.
    DualForwardTranspose,
}

impl MapRole {
    pub fn name(self) -> &'static str {
        match self {
            MapRole::Forward => "F_delta",
            MapRole::DualForward => "F_delta_dual",
            MapRole::ForwardTranspose => "F_delta^T",
            MapRole::DualForwardTranspose => "F_delta_dual^T",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeMap<I> {
    pub matrix: IntMatrix<I>,
    pub role: MapRole,
}

#[derive(Clone, Debug)]
pub struct LatticeMaps<I> {
    pub forward: LatticeMap<I>,
    pub dual_forward: LatticeMap<I>,
    pub forward_t: LatticeMap<I>,
    pub dual_forward_t: LatticeMap<I>,
}

impl<I: Int> LatticeMaps<I> {
    /// Lattice maps of a paired polytope/dual with index-wise vertex pairing.
    pub fn from_pair(delta: &Polytope<I>, dual: &Polytope<I>) -> Self {
        let f = IntMatrix::from_columns(dual.vertices());
        let fd = IntMatrix::from_columns(delta.vertices());
        Self {
            forward_t: LatticeMap { matrix: f.transpose(), role: MapRole::ForwardTranspose },
            dual_forward_t: LatticeMap { matrix: fd.transpose(), role: MapRole::DualForwardTranspose },
            forward: LatticeMap { matrix: f, role: MapRole::Forward },
            dual_forward: LatticeMap { matrix: fd, role: MapRole::DualForward },
        }
    }

    pub fn all(&self) -> [&LatticeMap<I>; 4] {
        [&self.forward, &self.dual_forward, &self.forward_t, &self.dual_forward_t]
    }

    /// `F_Δ F*_Δ*`, the map whose torus kernel is the finite group of the corollary.
    pub fn composite(&self) -> IntMatrix<I> {
        self.forward.matrix.mul(&self.dual_forward_t.matrix)
    }

    /// `F_Δ* F*_Δ`.
    pub fn composite_swapped(&self) -> IntMatrix<I> {
        self.dual_forward.matrix.mul(&self.forward_t.matrix)
    }
}

pub fn lattice_maps<I: Int>(n: usize) -> Result<LatticeMaps<I>> {
    let (delta, dual) = simplex_pair(n)?;
    Ok(LatticeMaps::from_pair(&delta, &dual))
}

pub fn kernel_data<I: Int>(map: &LatticeMap<I>) -> SubgroupDescription<I> {
    torus_kernel(&map.matrix)
}

#[derive(Clone, Debug)]
pub struct DualityReport<I> {
    pub n: usize,
    pub composite: IntMatrix<I>,
    pub composite_swapped: IntMatrix<I>,
    pub ranks: [usize; 4],
    pub kernel: SubgroupDescription<I>,
    pub kernel_order: I,
}

/// Checks `F_Δ F*_Δ* = F_Δ* F*_Δ = (n+1) Id`, that all four maps have rank
/// `n`, and that the kernel of the composite torus morphism has order
/// `(n+1)^n`.
pub fn verify_duality_identities<I: Int>(n: usize) -> Result<DualityReport<I>> {
    let maps = lattice_maps::<I>(n)?;
    let k = int::<I>(n as i64 + 1);
    let composite = maps.composite();
    let composite_swapped = maps.composite_swapped();
    if !composite.is_scalar(&k) {
        return Err(Error::IdentityFailed(format!("F_delta F_delta_dual^T = {}*Id (got {composite:?})", n + 1)));
    }
    if !composite_swapped.is_scalar(&k) {
        return Err(Error::IdentityFailed(format!(
            "F_delta_dual F_delta^T = {}*Id (got {composite_swapped:?})",
            n + 1
        )));
    }
    let ranks = maps.all().map(|m| m.matrix.rank());
    for (m, r) in maps.all().iter().zip(ranks) {
        if r != n {
            return Err(Error::IdentityFailed(format!("rank {} = {n} (got {r})", m.role.name())));
        }
    }
    let kernel = torus_kernel(&composite);
    let expected = num_traits::pow(k, n);
    let kernel_order = match &kernel.order_of_finite_part {
        GroupOrder::Finite(o) if *o == expected => o.clone(),
        other => {
            return Err(Error::IdentityFailed(format!(
                "|Ker(f_delta f_delta_dual^*)| = {expected} (got {other:?})"
            )))
        }
    };
    Ok(DualityReport { n, composite, composite_swapped, ranks, kernel, kernel_order })
}

/// How dual vertices were paired with the polytope's vertices when forming
/// the lattice maps of a general polytope.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pairing {
    /// Simplex: dual vertex `i` is the normal of the facet opposite vertex `i`.
    OppositeFacet,
    /// Both vertex lists sorted lexicographically.
    Lexicographic,
}

#[derive(Clone, Debug)]
pub struct SdVerdict<I: Int> {
    pub holds: bool,
    /// Dual vertices (in pairing order), when the dual is defined.
    pub dual_vertices: Vec<Vec<Rational<I>>>,
    /// Per-clause results; `None` when a clause could not be evaluated.
    pub clauses: [Option<bool>; 3],
    pub pairing: Option<Pairing>,
    pub diagnostic: String,
}

/// Decides property SD for an integral, full-dimensional polytope.
///
/// Clause 1: the polar dual is integral. Clause 2: equal vertex counts and
/// spans. Clause 3: `F_Δ F*_Δ*` has full rank, so its torus kernel is finite.
/// A polytope without the origin in its interior has no polar dual and is
/// reported as not SD.
pub fn has_property_sd<I: Int>(p: &Polytope<I>) -> Result<SdVerdict<I>> {
    let n = p.dim();
    let facets = match facets(p) {
        DualOutcome::Dual(f) => f,
        DualOutcome::OriginNotInterior { offending_incident } => {
            return Ok(SdVerdict {
                holds: false,
                dual_vertices: Vec::new(),
                clauses: [Some(false), None, None],
                pairing: None,
                diagnostic: format!(
                    "origin is not in the interior (supporting hyperplane through vertices {offending_incident:?}); dual undefined"
                ),
            });
        }
    };

    let d = p.num_vertices();
    let simplex = d == n + 1 && facets.len() == n + 1;
    let (primal, dual_vertices, pairing) = if simplex {
        let mut dual = Vec::with_capacity(d);
        for i in 0..d {
            let f = facets.iter().find(|f| !f.incident.contains(&i)).expect("simplex facet");
            dual.push(f.normal.clone());
        }
        (p.vertices().to_vec(), dual, Pairing::OppositeFacet)
    } else {
        let mut primal = p.vertices().to_vec();
        primal.sort();
        let mut dual: Vec<Vec<Rational<I>>> = facets.iter().map(|f| f.normal.clone()).collect();
        dual.sort();
        (primal, dual, Pairing::Lexicographic)
    };

    let integral = dual_vertices.iter().all(|v| v.iter().all(|q| q.is_integer()));
    let dual_span = {
        let base = &dual_vertices[0];
        let diffs: Vec<Vec<Rational<I>>> = dual_vertices[1..]
            .iter()
            .map(|v| v.iter().zip(base).map(|(a, b)| a.clone() - b.clone()).collect())
            .collect();
        dual::rank_of(&diffs)
    };
    let same_shape = dual_vertices.len() == d && dual_span == n;

    let mut notes = vec![format!("dual has {} vertices, span {dual_span}", dual_vertices.len())];
    let finite_kernel = if integral && same_shape {
        let u: Vec<Vec<I>> = dual_vertices.iter().map(|v| v.iter().map(|q| q.to_integer()).collect()).collect();
        let f = IntMatrix::from_columns(&u);
        let fd_t = IntMatrix::from_columns(&primal).transpose();
        let comp = f.mul(&fd_t);
        let r = comp.rank();
        notes.push(format!("rank(F F*) = {r} (pairing {pairing:?})"));
        Some(r == n)
    } else {
        None
    };
    if !integral {
        notes.push("dual is not integral".into());
    }
    if !same_shape {
        notes.push(format!("vertex count/span differ from the polytope's ({d}, {n})"));
    }

    let clauses = [Some(integral), Some(same_shape), finite_kernel];
    let holds = clauses.iter().all(|c| *c == Some(true));
    Ok(SdVerdict { holds, dual_vertices, clauses, pairing: Some(pairing), diagnostic: notes.join("; ") })
}

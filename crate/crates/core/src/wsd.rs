//! Pointwise WSD structures: a frame, the metric and the three 2-forms
//! expressed in that frame, and the axiom checker.

use nalgebra::{DMatrix, DVector};

use crate::scalar::{lit, Real};

/// Which part of a WSD structure a residual refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    Orthogonality,
    Orthonormality,
    Omega1,
    Omega2,
    OmegaD,
    DegenerateDimension,
    OmegaDNondegenerate,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::Orthogonality => "orthogonality",
            Axiom::Orthonormality => "orthonormality",
            Axiom::Omega1 => "omega1_canonical",
            Axiom::Omega2 => "omega2_canonical",
            Axiom::OmegaD => "omegaD_canonical",
            Axiom::DegenerateDimension => "degenerate_dimension",
            Axiom::OmegaDNondegenerate => "omegaD_nondegenerate",
        }
    }
}

/// Metric and forms at one tangent space, written in an ordered frame
/// `(x_1..x_m, y¹_1..y¹_m, y²_1..y²_m[, z, w])`.
#[derive(Clone, Debug)]
pub struct WsdStructureAt<T: Real> {
    pub m: usize,
    pub has_degenerate_pair: bool,
    /// Frame vectors as columns, in ambient coordinate components.
    pub frame: DMatrix<T>,
    pub g: DMatrix<T>,
    pub omega1: DMatrix<T>,
    pub omega2: DMatrix<T>,
    pub omega_d: DMatrix<T>,
}

impl<T: Real> WsdStructureAt<T> {
    /// Restricts ambient tensors (coordinate basis) to the span of `frame`.
    pub fn restrict(
        frame: DMatrix<T>,
        m: usize,
        has_degenerate_pair: bool,
        g: &DMatrix<T>,
        omega1: &DMatrix<T>,
        omega2: &DMatrix<T>,
        omega_d: &DMatrix<T>,
    ) -> Self {
        assert_eq!(frame.ncols(), 3 * m + if has_degenerate_pair { 2 } else { 0 });
        let pull = |a: &DMatrix<T>| frame.transpose() * a * &frame;
        Self {
            g: pull(g),
            omega1: pull(omega1),
            omega2: pull(omega2),
            omega_d: pull(omega_d),
            frame,
            m,
            has_degenerate_pair,
        }
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    /// Expected dimension of `ker ω1 ∩ ker ω2`.
    pub fn degenerate_dim(&self) -> usize {
        if self.has_degenerate_pair {
            2
        } else {
            0
        }
    }
}

/// Canonical shapes of `(ω1, ω2, ωD)` in an adapted frame.
pub fn canonical_forms<T: Real>(m: usize, has_degenerate_pair: bool) -> [DMatrix<T>; 3] {
    let d = 3 * m + if has_degenerate_pair { 2 } else { 0 };
    let mut o1 = DMatrix::zeros(d, d);
    let mut o2 = DMatrix::zeros(d, d);
    let mut od = DMatrix::zeros(d, d);
    let put = |a: &mut DMatrix<T>, i: usize, j: usize| {
        a[(i, j)] = T::one();
        a[(j, i)] = -T::one();
    };
    for i in 0..m {
        put(&mut o1, i, m + i);
        put(&mut o2, i, 2 * m + i);
        put(&mut od, m + i, 2 * m + i);
    }
    if has_degenerate_pair {
        put(&mut od, 3 * m, 3 * m + 1);
    }
    [o1, o2, od]
}

#[derive(Clone, Debug)]
pub struct AxiomResidual<T> {
    pub axiom: Axiom,
    pub residual: T,
    /// Offending entry `(i, j)` in the frame basis, when applicable.
    pub entry: Option<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct AxiomReport<T> {
    pub residuals: Vec<AxiomResidual<T>>,
    pub degenerate_dim: usize,
    pub expected_degenerate_dim: usize,
    /// Smallest singular value of `ωD` on `ker ω1 + ker ω2`.
    pub omega_d_margin: T,
    pub tol: T,
}

impl<T: Real> AxiomReport<T> {
    /// Largest residual over the entrywise axioms.
    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |a, r| a.max(r.residual))
    }

    pub fn worst(&self) -> &AxiomResidual<T> {
        self.residuals
            .iter()
            .fold(&self.residuals[0], |a, r| if r.residual > a.residual { r } else { a })
    }

    pub fn residual(&self, axiom: Axiom) -> T {
        self.residuals.iter().find(|r| r.axiom == axiom).map_or(T::zero(), |r| r.residual)
    }

    pub fn passes(&self) -> bool {
        self.residuals.iter().all(|r| r.residual < self.tol)
            && self.degenerate_dim == self.expected_degenerate_dim
            && self.omega_d_margin > self.tol
    }
}

fn max_entry<T: Real>(a: &DMatrix<T>) -> (T, Option<(usize, usize)>) {
    let mut best = (T::zero(), None);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let v = a[(i, j)].abs();
            if v > best.0 || best.1.is_none() {
                best = (v, Some((i, j)));
            }
        }
    }
    best
}

/// Orthonormal basis (columns) of the null space of `a`.
pub(crate) fn null_space<T: Real>(a: &DMatrix<T>, rel_tol: T) -> DMatrix<T> {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return DMatrix::identity(n, n);
    }
    // pad to square so that the full right-singular basis is returned
    let mut sq = DMatrix::zeros(a.nrows().max(n), n);
    sq.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let scale = svd.singular_values.iter().fold(T::one(), |a, &s| a.max(s));
    let cols: Vec<DVector<T>> = (0..n)
        .filter(|&k| svd.singular_values[k] <= rel_tol * scale)
        .map(|k| vt.row(k).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis of the column span of `a`.
pub(crate) fn column_span<T: Real>(a: &DMatrix<T>, rel_tol: T) -> DMatrix<T> {
    if a.ncols() == 0 {
        return a.clone();
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested");
    let scale = svd.singular_values.iter().fold(T::zero(), |a, &s| a.max(s));
    let cols: Vec<DVector<T>> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > rel_tol * scale)
        .map(|k| u.column(k).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(a.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Checks the pointwise WSD axioms: frame orthogonality (orthonormality of
/// the first `3m` vectors), the canonical block shapes of the three forms,
/// `dim(ker ω1 ∩ ker ω2)`, and nondegeneracy of `ωD` on `ker ω1 + ker ω2`.
pub fn verify_wsd_axioms<T: Real>(s: &WsdStructureAt<T>, tol: T) -> AxiomReport<T> {
    let d = s.dim();
    let k = 3 * s.m;
    let mut residuals = Vec::new();

    let mut orth = (T::zero(), None);
    let mut unit = (T::zero(), None);
    for i in 0..d {
        for j in 0..d {
            if i != j {
                let v = s.g[(i, j)].abs();
                if v > orth.0 || orth.1.is_none() {
                    orth = (v, Some((i, j)));
                }
            } else if i < k {
                let v = (s.g[(i, i)] - T::one()).abs();
                if v > unit.0 || unit.1.is_none() {
                    unit = (v, Some((i, i)));
                }
            }
        }
    }
    residuals.push(AxiomResidual { axiom: Axiom::Orthogonality, residual: orth.0, entry: orth.1 });
    residuals.push(AxiomResidual { axiom: Axiom::Orthonormality, residual: unit.0, entry: unit.1 });

    let [c1, c2, cd] = canonical_forms::<T>(s.m, s.has_degenerate_pair);
    for (axiom, form, canon) in
        [(Axiom::Omega1, &s.omega1, c1), (Axiom::Omega2, &s.omega2, c2), (Axiom::OmegaD, &s.omega_d, cd)]
    {
        let (r, e) = max_entry(&(form - canon));
        residuals.push(AxiomResidual { axiom, residual: r, entry: e });
    }

    let rank_tol = lit::<T>(1e-6);
    let mut stacked = DMatrix::zeros(2 * d, d);
    stacked.view_mut((0, 0), (d, d)).copy_from(&s.omega1);
    stacked.view_mut((d, 0), (d, d)).copy_from(&s.omega2);
    let degenerate_dim = null_space(&stacked, rank_tol).ncols();

    let k1 = null_space(&s.omega1, rank_tol);
    let k2 = null_space(&s.omega2, rank_tol);
    let mut both = DMatrix::zeros(d, k1.ncols() + k2.ncols());
    both.view_mut((0, 0), (d, k1.ncols())).copy_from(&k1);
    both.view_mut((0, k1.ncols()), (d, k2.ncols())).copy_from(&k2);
    let b = column_span(&both, rank_tol);
    let omega_d_margin = if b.ncols() == 0 {
        T::zero()
    } else {
        let restricted = b.transpose() * &s.omega_d * &b;
        let sv = restricted.singular_values();
        sv.iter().fold(sv[0], |a, &x| a.min(x))
    };

    AxiomReport { residuals, degenerate_dim, expected_degenerate_dim: s.degenerate_dim(), omega_d_margin, tol }
}

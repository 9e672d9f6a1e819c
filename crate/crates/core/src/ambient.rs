//! The self-dual structure on the fibred product `(C*)^{n+1} ×_μ (C*)^{n+1}`
//! in the global coordinates `(θ̄, r̄, η̄)`.
//!
//! Tangent vectors and forms use the coordinate basis
//! `(∂θ_0..∂θ_n, ∂r_0..∂r_n, ∂η_0..∂η_n)`. A 2-form `c dx_a ∧ dx_b` is the
//! antisymmetric matrix with `Ω[a][b] = c`, `Ω[b][a] = -c`, so that
//! `ω(u, v) = uᵀ Ω v`. Angles are in turns: `θ` stands for the phase
//! `e^{2πiθ}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{compensated_product, compensated_sum, from_usize, lit, wrap_turns, Real};
use crate::wsd::{verify_wsd_axioms, AxiomReport, WsdStructureAt};

#[inline]
pub fn theta_index(n: usize, i: usize) -> usize {
    debug_assert!(i <= n);
    i
}

#[inline]
pub fn r_index(n: usize, i: usize) -> usize {
    n + 1 + i
}

#[inline]
pub fn eta_index(n: usize, i: usize) -> usize {
    2 * (n + 1) + i
}

/// Labels of the coordinate basis, in order.
pub fn basis_labels(n: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(3 * (n + 1));
    for block in ["theta", "r", "eta"] {
        out.extend((0..=n).map(|i| format!("d{block}_{i}")));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmbientPoint<T: Real> {
    n: usize,
    pub theta: DVector<T>,
    pub r: DVector<T>,
    pub eta: DVector<T>,
}

impl<T: Real> AmbientPoint<T> {
    /// Angles are wrapped into `[0, 1)`; radii must be strictly positive.
    pub fn new(theta: DVector<T>, r: DVector<T>, eta: DVector<T>) -> Result<Self> {
        let len = r.len();
        if len < 2 {
            return Err(Error::InvalidDimension(format!("need n >= 1, got {} radii", len)));
        }
        if theta.len() != len || eta.len() != len {
            return Err(Error::InvalidDimension(format!(
                "theta/r/eta lengths {}/{}/{} differ",
                theta.len(),
                len,
                eta.len()
            )));
        }
        if let Some(i) = r.iter().position(|&x| !(x > T::zero()) || !x.is_finite()) {
            return Err(Error::Domain(format!("r_{i} = {} is not a positive finite radius", r[i])));
        }
        Ok(Self { n: len - 1, theta: theta.map(wrap_turns), r, eta: eta.map(wrap_turns) })
    }

    /// Point of the section `θ̄ = η̄ = 0`.
    pub fn on_section(r: DVector<T>) -> Result<Self> {
        let len = r.len();
        Self::new(DVector::zeros(len), r, DVector::zeros(len))
    }

    pub fn from_slices(theta: &[T], r: &[T], eta: &[T]) -> Result<Self> {
        Self::new(DVector::from_column_slice(theta), DVector::from_column_slice(r), DVector::from_column_slice(eta))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Real dimension `3(n+1)` of the ambient space.
    pub fn dim(&self) -> usize {
        3 * (self.n + 1)
    }

    /// Flattened coordinates in basis order.
    pub fn coords(&self) -> DVector<T> {
        let k = self.n + 1;
        let mut x = DVector::zeros(3 * k);
        x.rows_mut(0, k).copy_from(&self.theta);
        x.rows_mut(k, k).copy_from(&self.r);
        x.rows_mut(2 * k, k).copy_from(&self.eta);
        x
    }

    pub fn min_r(&self) -> T {
        self.r.iter().fold(self.r[0], |a, &b| a.min(b))
    }
}

fn two_pi<T: Real>() -> T {
    T::two_pi()
}

fn four_pi_sq<T: Real>() -> T {
    let t = T::two_pi();
    t * t
}

/// `(μ1, μ2) = (-π Σ r_i², -(1/2π) Σ log r_i)`.
pub fn moment_map<T: Real>(p: &AmbientPoint<T>) -> (T, T) {
    let mu1 = -T::pi() * compensated_sum(p.r.iter().map(|&x| x * x));
    let mu2 = -compensated_sum(p.r.iter().map(|&x| x.ln())) / two_pi::<T>();
    (mu1, mu2)
}

/// Differentials `dμ1`, `dμ2` as covectors in the coordinate basis.
pub fn moment_map_differentials<T: Real>(p: &AmbientPoint<T>) -> (DVector<T>, DVector<T>) {
    let n = p.n;
    let mut d1 = DVector::zeros(p.dim());
    let mut d2 = DVector::zeros(p.dim());
    for i in 0..=n {
        d1[r_index(n, i)] = -two_pi::<T>() * p.r[i];
        d2[r_index(n, i)] = -T::one() / (two_pi::<T>() * p.r[i]);
    }
    (d1, d2)
}

/// `(k1, k2) -> (ρ1, ρ2)` with `ρ1 = √(-k1/π)` and
/// `ρ2² = ((n+1)/4π²) log(-k1/π) + k2/π`.
pub fn convert_parameters<T: Real>(n: usize, k1: T, k2: T) -> Result<(T, T)> {
    if n < 1 {
        return Err(Error::InvalidDimension(format!("n must be >= 1, got {n}")));
    }
    if !(k1 < T::zero()) {
        return Err(Error::InvalidParameter(format!("k1 = {k1} must be negative")));
    }
    let a = -k1 / T::pi();
    let rho2_sq = from_usize::<T>(n + 1) / four_pi_sq::<T>() * a.ln() + k2 / T::pi();
    if rho2_sq < T::zero() {
        return Err(Error::InvalidParameter(format!("rho2^2 = {rho2_sq} < 0: (k1, k2) outside the chart")));
    }
    Ok((a.sqrt(), rho2_sq.sqrt()))
}

/// Inverse of [`convert_parameters`].
pub fn levels_from_rho<T: Real>(n: usize, rho1: T, rho2: T) -> Result<(T, T)> {
    if n < 1 {
        return Err(Error::InvalidDimension(format!("n must be >= 1, got {n}")));
    }
    if !(rho1 > T::zero()) || !(rho2 >= T::zero()) {
        return Err(Error::InvalidParameter(format!("need rho1 > 0 and rho2 >= 0, got ({rho1}, {rho2})")));
    }
    let k1 = -T::pi() * rho1 * rho1;
    let k2 = T::pi() * (rho2 * rho2 - from_usize::<T>(n + 1) / four_pi_sq::<T>() * (rho1 * rho1).ln());
    Ok((k1, k2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FormId {
    Omega1,
    Omega2,
    OmegaD,
}

impl FormId {
    pub const ALL: [FormId; 3] = [FormId::Omega1, FormId::Omega2, FormId::OmegaD];

    pub fn name(self) -> &'static str {
        match self {
            FormId::Omega1 => "omega1",
            FormId::Omega2 => "omega2",
            FormId::OmegaD => "omegaD",
        }
    }
}

/// Coefficient matrix of an ambient 2-form as a function of the radii.
pub fn form_matrix<T: Real>(form: FormId, r: &[T]) -> DMatrix<T> {
    let n = r.len() - 1;
    let d = 3 * (n + 1);
    let mut o = DMatrix::zeros(d, d);
    for (i, &ri) in r.iter().enumerate() {
        let (a, b, c) = match form {
            FormId::Omega1 => (r_index(n, i), theta_index(n, i), two_pi::<T>() * ri),
            FormId::Omega2 => (r_index(n, i), eta_index(n, i), T::one() / (two_pi::<T>() * ri)),
            FormId::OmegaD => (theta_index(n, i), eta_index(n, i), T::one()),
        };
        o[(a, b)] = c;
        o[(b, a)] = -c;
    }
    o
}

pub fn metric_matrix<T: Real>(r: &[T]) -> DMatrix<T> {
    let n = r.len() - 1;
    let d = 3 * (n + 1);
    let mut g = DMatrix::zeros(d, d);
    for (i, &ri) in r.iter().enumerate() {
        let s = four_pi_sq::<T>() * ri * ri;
        g[(theta_index(n, i), theta_index(n, i))] = s;
        g[(r_index(n, i), r_index(n, i))] = T::one();
        g[(eta_index(n, i), eta_index(n, i))] = T::one() / s;
    }
    g
}

#[derive(Clone, Debug)]
pub struct TensorsAt<T: Real> {
    pub g: DMatrix<T>,
    pub omega1: DMatrix<T>,
    pub omega2: DMatrix<T>,
    pub omega_d: DMatrix<T>,
    pub basis_order: Vec<String>,
}

impl<T: Real> TensorsAt<T> {
    pub fn form(&self, id: FormId) -> &DMatrix<T> {
        match id {
            FormId::Omega1 => &self.omega1,
            FormId::Omega2 => &self.omega2,
            FormId::OmegaD => &self.omega_d,
        }
    }
}

pub fn ambient_tensors_at<T: Real>(p: &AmbientPoint<T>) -> TensorsAt<T> {
    let r = p.r.as_slice();
    TensorsAt {
        g: metric_matrix(r),
        omega1: form_matrix(FormId::Omega1, r),
        omega2: form_matrix(FormId::Omega2, r),
        omega_d: form_matrix(FormId::OmegaD, r),
        basis_order: basis_labels(p.n),
    }
}

/// The frame `x_i = ∂r_i`, `y¹_i = (1/2πr_i)∂θ_i`, `y²_i = 2πr_i ∂η_i`, as
/// columns ordered `(x_0..x_n, y¹_0..y¹_n, y²_0..y²_n)`.
pub fn ambient_adapted_frame<T: Real>(p: &AmbientPoint<T>) -> DMatrix<T> {
    let n = p.n;
    let k = n + 1;
    let mut f = DMatrix::zeros(3 * k, 3 * k);
    for i in 0..k {
        let s = two_pi::<T>() * p.r[i];
        f[(r_index(n, i), i)] = T::one();
        f[(theta_index(n, i), k + i)] = T::one() / s;
        f[(eta_index(n, i), 2 * k + i)] = s;
    }
    f
}

/// The ambient structure written in its adapted frame (rank `m = n+1`, no
/// degenerate directions).
pub fn ambient_structure_in_frame<T: Real>(p: &AmbientPoint<T>) -> WsdStructureAt<T> {
    let t = ambient_tensors_at(p);
    WsdStructureAt::restrict(ambient_adapted_frame(p), p.n + 1, false, &t.g, &t.omega1, &t.omega2, &t.omega_d)
}

/// Verifies orthonormality and the canonical shapes of the adapted frame;
/// on failure the error names the offending entry.
pub fn verify_ambient_frame<T: Real>(p: &AmbientPoint<T>, tol: T) -> Result<AxiomReport<T>> {
    let report = verify_wsd_axioms(&ambient_structure_in_frame(p), tol);
    if !report.passes() {
        let w = report.worst();
        return Err(Error::IdentityFailed(format!(
            "ambient adapted frame: {} residual {} at entry {:?}",
            w.axiom.name(),
            w.residual,
            w.entry
        )));
    }
    Ok(report)
}

/// `∏(2πr_i) · ∏(1/2πr_i)`, evaluated in that order with a compensated product.
pub fn leaf_volume<T: Real>(p: &AmbientPoint<T>) -> T {
    let up = p.r.iter().map(|&x| two_pi::<T>() * x);
    let down = p.r.iter().map(|&x| T::one() / (two_pi::<T>() * x));
    compensated_product(up.chain(down))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosednessResidual<T> {
    /// Largest absolute component of the finite-difference `dω`.
    pub residual: T,
    pub h: T,
    /// Set when `h` exceeds a tenth of the smallest radius.
    pub large_step: bool,
}

/// Default finite-difference step `1e-5 · min(1, min r_i)`.
pub fn default_fd_step<T: Real>(p: &AmbientPoint<T>) -> T {
    lit::<T>(1e-5) * T::one().min(p.min_r())
}

/// Largest component of `dω` computed by central differences of a
/// coefficient function `x -> Ω(x)` on flattened coordinates:
/// `(dω)_{abc} = ∂_a ω_{bc} - ∂_b ω_{ac} + ∂_c ω_{ab}` for `a < b < c`.
pub fn fd_exterior_derivative<T: Real>(coeffs: impl Fn(&DVector<T>) -> DMatrix<T>, x: &DVector<T>, h: T) -> T {
    let d = x.len();
    let two_h = h + h;
    let derivs: Vec<DMatrix<T>> = (0..d)
        .map(|a| {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[a] += h;
            xm[a] -= h;
            (coeffs(&xp) - coeffs(&xm)) / two_h
        })
        .collect();
    let mut worst = T::zero();
    for a in 0..d {
        for b in a + 1..d {
            for c in b + 1..d {
                let v = derivs[a][(b, c)] - derivs[b][(a, c)] + derivs[c][(a, b)];
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

pub fn exterior_derivative_residual<T: Real>(form: FormId, p: &AmbientPoint<T>, h: T) -> Result<ClosednessResidual<T>> {
    if !(h > T::zero()) {
        return Err(Error::InvalidParameter(format!("finite-difference step h = {h} must be positive")));
    }
    let n = p.n;
    let large_step = h > lit::<T>(0.1) * p.min_r();
    if large_step {
        log::warn!("finite-difference step {h} is large relative to min r = {}", p.min_r());
    }
    let residual = fd_exterior_derivative(
        |x: &DVector<T>| form_matrix(form, x.rows(n + 1, n + 1).as_slice()),
        &p.coords(),
        h,
    );
    Ok(ClosednessResidual { residual, h, large_step })
}

/// Auxiliary vector fields of the reduction, their metric duals, and the
/// identities among their norms.
#[derive(Clone, Debug)]
pub struct AuxiliaryVectors<T: Real> {
    pub x1: DVector<T>,
    pub x2: DVector<T>,
    pub y1: DVector<T>,
    pub y2: DVector<T>,
    pub x1_dual: DVector<T>,
    pub x2_dual: DVector<T>,
    pub y1_dual: DVector<T>,
    pub y2_dual: DVector<T>,
    pub norm2_x1: T,
    pub norm2_x2: T,
    pub norm2_y1: T,
    pub norm2_y2: T,
    pub inner_x: T,
    pub inner_y: T,
    /// `‖X1‖²‖X2‖²`, at least `(n+1)²` by Cauchy-Schwarz.
    pub product: T,
    /// Set when `product - (n+1)² <= 1e-8 (n+1)²`, i.e. on (or numerically
    /// at) the equal-radius locus where `X1 ∥ X2`.
    pub collinear: bool,
}

impl<T: Real> AuxiliaryVectors<T> {
    /// Largest deviation from `⟨X1,X2⟩ = ⟨Y1,Y2⟩ = n+1` and the closed-form norms.
    pub fn identity_residual(&self, r: &[T]) -> T {
        let k = from_usize::<T>(r.len());
        let s2 = four_pi_sq::<T>() * compensated_sum(r.iter().map(|&x| x * x));
        let sm2 = compensated_sum(r.iter().map(|&x| T::one() / (x * x))) / four_pi_sq::<T>();
        let rel = |a: T, b: T| (a - b).abs() / b.abs().max(T::one());
        [
            rel(self.inner_x, k),
            rel(self.inner_y, k),
            rel(self.norm2_x1, s2),
            rel(self.norm2_y2, s2),
            rel(self.norm2_x2, sm2),
            rel(self.norm2_y1, sm2),
        ]
        .into_iter()
        .fold(T::zero(), |a, b| a.max(b))
    }
}

pub fn auxiliary_vectors<T: Real>(p: &AmbientPoint<T>) -> AuxiliaryVectors<T> {
    let n = p.n;
    let d = p.dim();
    let c = four_pi_sq::<T>();
    let mut x1 = DVector::zeros(d);
    let mut x2 = DVector::zeros(d);
    let mut y1 = DVector::zeros(d);
    let mut y2 = DVector::zeros(d);
    for i in 0..=n {
        let r2 = p.r[i] * p.r[i];
        x1[theta_index(n, i)] = T::one();
        x2[theta_index(n, i)] = T::one() / (c * r2);
        y1[eta_index(n, i)] = T::one();
        y2[eta_index(n, i)] = c * r2;
    }
    let g = metric_matrix(p.r.as_slice());
    let x1_dual = &g * &x1;
    let x2_dual = &g * &x2;
    let y1_dual = &g * &y1;
    let y2_dual = &g * &y2;
    let norm2_x1 = x1.dot(&x1_dual);
    let norm2_x2 = x2.dot(&x2_dual);
    let norm2_y1 = y1.dot(&y1_dual);
    let norm2_y2 = y2.dot(&y2_dual);
    let inner_x = x2.dot(&x1_dual);
    let inner_y = y2.dot(&y1_dual);
    let product = norm2_x1 * norm2_x2;
    let k2 = from_usize::<T>((n + 1) * (n + 1));
    let collinear = product - k2 <= lit::<T>(1e-8) * k2;
    AuxiliaryVectors {
        x1,
        x2,
        y1,
        y2,
        x1_dual,
        x2_dual,
        y1_dual,
        y2_dual,
        norm2_x1,
        norm2_x2,
        norm2_y1,
        norm2_y2,
        inner_x,
        inner_y,
        product,
        collinear,
    }
}

//! Projections `π1 : X -> CP^n` and `π2 : X -> H^n`, the diffeomorphism `φ`
//! with its pullback identities, quotient distances, the complex structures
//! `J` and the deformation flow `α_t` / `ψ_t`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::ambient::{
    ambient_tensors_at, eta_index, form_matrix, metric_matrix, moment_map, r_index, theta_index, AmbientPoint, FormId,
};
use crate::error::{Error, Result};
use crate::polytope::{lattice_maps, torus_kernel, IntMatrix};
use crate::reduction::{LevelSetSpec, ReducedPoint};
use crate::scalar::{compensated_sum, from_usize, lit, Real};

type C<T> = Complex<T>;

fn four_pi_sq<T: Real>() -> T {
    T::two_pi() * T::two_pi()
}

fn phase<T: Real>(turns: T) -> C<T> {
    let a = T::two_pi() * turns;
    C::new(a.cos(), a.sin())
}

fn norm_sqr<T: Real>(z: &[C<T>]) -> T {
    compensated_sum(z.iter().map(|c| c.re * c.re + c.im * c.im))
}

/// Point of `CP^n_λ`, stored as a representative on `Σ|z_i|² = λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CPnPoint<T: Real> {
    pub z: Vec<C<T>>,
    pub lambda: T,
}

/// Point of `H^n_λ = {Σ|z_i|² = λ} / N_{Δn*}`, stored as a representative.
#[derive(Clone, Debug, PartialEq)]
pub struct HnPoint<T: Real> {
    pub z: Vec<C<T>>,
    pub lambda: T,
}

fn rescale<T: Real>(z: &[C<T>], lambda: T) -> Vec<C<T>> {
    let f = (lambda / norm_sqr(z)).sqrt();
    z.iter().map(|c| c * f).collect()
}

impl<T: Real> CPnPoint<T> {
    /// Normalizes an arbitrary nonzero representative to `Σ|z|² = λ`.
    pub fn normalized(z: Vec<C<T>>, lambda: T) -> Result<Self> {
        if !(norm_sqr(&z) > T::zero()) {
            return Err(Error::Domain("zero vector has no projective class".into()));
        }
        Ok(Self { z: rescale(&z, lambda), lambda })
    }

    pub fn n(&self) -> usize {
        self.z.len() - 1
    }

    /// Action of a lift `s ∈ R^{n+1}` of a torus element: `z_i ↦ e^{2πi s_i} z_i`.
    pub fn act(&self, s: &DVector<T>) -> Self {
        Self { z: self.z.iter().zip(s.iter()).map(|(c, &x)| c * phase(x)).collect(), lambda: self.lambda }
    }
}

impl<T: Real> HnPoint<T> {
    pub fn normalized(z: Vec<C<T>>, lambda: T) -> Result<Self> {
        if !(norm_sqr(&z) > T::zero()) {
            return Err(Error::Domain("zero vector has no class in H^n".into()));
        }
        Ok(Self { z: rescale(&z, lambda), lambda })
    }

    pub fn n(&self) -> usize {
        self.z.len() - 1
    }

    /// Action of the second torus factor, which enters `π2` through `-η̄`:
    /// `z_i ↦ e^{-2πi s_i} z_i`.
    pub fn act(&self, s: &DVector<T>) -> Self {
        Self { z: self.z.iter().zip(s.iter()).map(|(c, &x)| c * phase(-x)).collect(), lambda: self.lambda }
    }
}

/// `π1([θ̄, r̄, η̄]) = [r_i e^{2πiθ_i}]`, with `λ = ρ1²`.
pub fn project_pi1<T: Real>(p: &ReducedPoint<T>) -> CPnPoint<T> {
    let theta = p.theta();
    let z = p.base_r.iter().zip(theta.iter()).map(|(&r, &t)| phase(t) * r).collect();
    CPnPoint { z, lambda: -p.spec.k1 / T::pi() }
}

/// `|∏|z_i|² - e^{-4π²ρ2²}(Σ|z_i|²)^{n+1}| / (Σ|z_i|²)^{n+1}`.
pub fn pi1_image_residual<T: Real>(z: &[C<T>], rho2: T) -> T {
    let s = norm_sqr(z);
    // ∏(|z_i|²/s) computed factorwise to stay in range
    let prod = z.iter().fold(T::one(), |acc, c| acc * (c.norm_sqr() / s));
    (prod - (-four_pi_sq::<T>() * rho2 * rho2).exp()).abs()
}

/// Fubini-Study distance scaled by `scale`, in the stable form
/// `scale · atan2(‖z ∧ w‖, |⟨z, w⟩|)`.
pub fn fubini_study_distance<T: Real>(z: &[C<T>], w: &[C<T>], scale: T) -> T {
    let mut inner = C::new(T::zero(), T::zero());
    for (a, b) in z.iter().zip(w) {
        inner += a.conj() * b;
    }
    let mut wedge = T::zero();
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            wedge += (z[i] * w[j] - z[j] * w[i]).norm_sqr();
        }
    }
    scale * wedge.sqrt().atan2(inner.norm_sqr().sqrt())
}

/// Quotient distance on `CP^n`: `N_{Δn}` is the diagonal circle, which the
/// Fubini-Study distance already factors out.
pub fn cpn_distance<T: Real>(p: &CPnPoint<T>, q: &CPnPoint<T>, scale: T) -> T {
    fubini_study_distance(&p.z, &q.z, scale)
}

/// The group `N_{Δn*}`: a circle (identity component) times finitely many
/// coset representatives.
#[derive(Clone, Debug)]
pub struct HnQuotient<T: Real> {
    pub n: usize,
    pub circle: Vec<DVector<T>>,
    pub cosets: Vec<DVector<T>>,
    /// Set when the identity component is the diagonal circle, along which
    /// the Fubini-Study distance is constant.
    pub circle_is_diagonal: bool,
}

impl<T: Real> HnQuotient<T> {
    pub fn new(n: usize) -> Result<Self> {
        let maps = lattice_maps::<i64>(n)?;
        let k = torus_kernel(&maps.dual_forward.matrix);
        let circle: Vec<DVector<T>> = k
            .identity_component_f64()
            .into_iter()
            .map(|v| DVector::from_iterator(v.len(), v.into_iter().map(lit::<T>)))
            .collect();
        let cosets = k
            .coset_representatives_f64()
            .into_iter()
            .map(|v| DVector::from_iterator(v.len(), v.into_iter().map(lit::<T>)))
            .collect();
        let circle_is_diagonal =
            circle.len() == 1 && circle[0].iter().all(|&x| x == circle[0][0]) && circle[0][0] != T::zero();
        Ok(Self { n, circle, cosets, circle_is_diagonal })
    }

    pub fn order_of_finite_part(&self) -> usize {
        self.cosets.len()
    }
}

const GRID: usize = 256;

fn golden_section<T: Real>(f: impl Fn(T) -> T, mut a: T, mut b: T, iters: usize) -> (T, T) {
    let g = (lit::<T>(5.0).sqrt() - T::one()) / lit::<T>(2.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Distance on `H^n`: minimum of the Fubini-Study distance over the
/// `N_{Δn*}`-orbit of `q`. The circle factor is searched on a 256-point grid
/// refined by golden section; the finite part is enumerated exactly.
pub fn hn_distance<T: Real>(p: &HnPoint<T>, q: &HnPoint<T>, group: &HnQuotient<T>, scale: T) -> T {
    let moved = |x: &DVector<T>| -> Vec<C<T>> { q.z.iter().zip(x.iter()).map(|(c, &t)| c * phase(t)).collect() };
    let mut best = T::max_value().unwrap_or(lit(f64::MAX));
    for g in &group.cosets {
        let d = if group.circle_is_diagonal || group.circle.is_empty() {
            fubini_study_distance(&p.z, &moved(g), scale)
        } else {
            let v = &group.circle[0];
            let f = |c: T| fubini_study_distance(&p.z, &moved(&(g + v * c)), scale);
            let step = T::one() / from_usize::<T>(GRID);
            let (mut i_best, mut f_best) = (0, f(T::zero()));
            for i in 1..GRID {
                let fi = f(from_usize::<T>(i) * step);
                if fi < f_best {
                    i_best = i;
                    f_best = fi;
                }
            }
            let c0 = from_usize::<T>(i_best) * step;
            golden_section(f, c0 - step, c0 + step, 60).1.min(f_best)
        };
        best = best.min(d);
    }
    best
}

/// `π2` with the normalization `λ = ρ2²`:
/// `z_i = √((1/2π²) log(ρ1/r_i)) e^{-2πiη_i}`.
pub fn project_pi2<T: Real>(p: &ReducedPoint<T>) -> Result<HnPoint<T>> {
    let rho1 = p.spec.rho1();
    let eta = p.eta();
    let two_pi_sq = T::two_pi() * T::pi();
    let mut z = Vec::with_capacity(p.n() + 1);
    for (i, (&r, &e)) in p.base_r.iter().zip(eta.iter()).enumerate() {
        if !(r < rho1) {
            return Err(Error::Domain(format!("r_{i} = {r} >= rho1 = {rho1}")));
        }
        z.push(phase(-e) * ((rho1 / r).ln() / two_pi_sq).sqrt());
    }
    Ok(HnPoint { z, lambda: p.spec.rho2_sq() })
}

/// `|Σ_i e^{-4π²|z_i|²} - 1|`.
pub fn pi2_image_residual<T: Real>(z: &[C<T>]) -> T {
    (compensated_sum(z.iter().map(|c| (-four_pi_sq::<T>() * c.norm_sqr()).exp())) - T::one()).abs()
}

/// `φ(θ̄, r̄, η̄) = (θ̄, (ρ1 e^{-2π²ρ2² r_i²})_i, -η̄)`.
pub fn phi_map<T: Real>(p: &AmbientPoint<T>, rho1: T, rho2: T) -> AmbientPoint<T> {
    let c = T::two_pi() * T::pi() * rho2 * rho2;
    let r = p.r.map(|x| rho1 * (-c * x * x).exp());
    AmbientPoint::new(p.theta.clone(), r, -p.eta.clone()).expect("positive radii")
}

/// Inverse of [`phi_map`], defined on `r_i < ρ1`.
pub fn phi_inverse<T: Real>(p: &AmbientPoint<T>, rho1: T, rho2: T) -> Result<AmbientPoint<T>> {
    let c = T::two_pi() * T::pi() * rho2 * rho2;
    if let Some(i) = p.r.iter().position(|&x| !(x < rho1)) {
        return Err(Error::Domain(format!("r_{i} = {} is not below rho1 = {rho1}", p.r[i])));
    }
    let r = p.r.map(|x| ((rho1 / x).ln() / c).sqrt());
    AmbientPoint::new(p.theta.clone(), r, -p.eta.clone())
}

/// Jacobian of `φ` in the coordinate basis (diagonal).
pub fn phi_jacobian<T: Real>(p: &AmbientPoint<T>, rho1: T, rho2: T) -> DMatrix<T> {
    let n = p.n();
    let c = T::two_pi() * T::pi() * rho2 * rho2;
    let mut j = DMatrix::zeros(p.dim(), p.dim());
    for i in 0..=n {
        let r = p.r[i];
        j[(theta_index(n, i), theta_index(n, i))] = T::one();
        j[(r_index(n, i), r_index(n, i))] = -lit::<T>(2.0) * c * r * rho1 * (-c * r * r).exp();
        j[(eta_index(n, i), eta_index(n, i))] = -T::one();
    }
    j
}

/// `J̃2 = Σ (2πr_i ∂η_i ⊗ dr_i - (1/2πr_i) ∂r_i ⊗ dη_i)` as a matrix acting on
/// coordinate vectors.
pub fn ambient_j2<T: Real>(r: &[T]) -> DMatrix<T> {
    let n = r.len() - 1;
    let d = 3 * (n + 1);
    let mut j = DMatrix::zeros(d, d);
    for (i, &ri) in r.iter().enumerate() {
        j[(eta_index(n, i), r_index(n, i))] = T::two_pi() * ri;
        j[(r_index(n, i), eta_index(n, i))] = -T::one() / (T::two_pi() * ri);
    }
    j
}

fn diag_2form<T: Real>(n: usize, pairs: impl Iterator<Item = (usize, usize, T)>) -> DMatrix<T> {
    let d = 3 * (n + 1);
    let mut o = DMatrix::zeros(d, d);
    for (a, b, c) in pairs {
        o[(a, b)] = c;
        o[(b, a)] = -c;
    }
    o
}

/// The closed-form pullbacks displayed for `φ`, evaluated at `p`.
#[derive(Clone, Debug)]
pub struct PhiPullbackDisplays<T: Real> {
    /// `Σ 8π³ρ1²ρ2² r_i e^{-4π²ρ2²r_i²} dr_i ∧ dθ_i`.
    pub omega1: DMatrix<T>,
    /// `2πρ2² Σ r_i dr_i ∧ dη_i`.
    pub omega2: DMatrix<T>,
    pub metric: DMatrix<T>,
    /// `(-k1)(1 - Σ e^{-4π²ρ2²r_i²})`.
    pub mu1_shifted: T,
    /// `πρ2²(Σ r_i² - 1)`.
    pub mu2_shifted: T,
    pub j2: DMatrix<T>,
}

pub fn phi_pullback_displays<T: Real>(p: &AmbientPoint<T>, rho1: T, rho2: T) -> PhiPullbackDisplays<T> {
    let n = p.n();
    let pi = T::pi();
    let (r1s, r2s) = (rho1 * rho1, rho2 * rho2);
    let e = |r: T| (-four_pi_sq::<T>() * r2s * r * r).exp();
    let eight_pi3 = lit::<T>(8.0) * pi * pi * pi;
    let r = p.r.as_slice();
    let omega1 = diag_2form(n, (0..=n).map(|i| (r_index(n, i), theta_index(n, i), eight_pi3 * r1s * r2s * r[i] * e(r[i]))));
    let omega2 = diag_2form(n, (0..=n).map(|i| (r_index(n, i), eta_index(n, i), T::two_pi() * r2s * r[i])));
    let mut metric = DMatrix::zeros(p.dim(), p.dim());
    let mut j2 = DMatrix::zeros(p.dim(), p.dim());
    for i in 0..=n {
        let ei = e(r[i]);
        metric[(theta_index(n, i), theta_index(n, i))] = four_pi_sq::<T>() * r1s * ei;
        metric[(r_index(n, i), r_index(n, i))] = four_pi_sq::<T>() * four_pi_sq::<T>() * r1s * r2s * r2s * r[i] * r[i] * ei;
        metric[(eta_index(n, i), eta_index(n, i))] = T::one() / (ei * four_pi_sq::<T>() * r1s);
        let a = eight_pi3 * r[i] * r1s * r2s * ei;
        j2[(eta_index(n, i), r_index(n, i))] = a;
        j2[(r_index(n, i), eta_index(n, i))] = -T::one() / a;
    }
    let k1 = -pi * r1s;
    PhiPullbackDisplays {
        omega1,
        omega2,
        metric,
        mu1_shifted: -k1 * (T::one() - compensated_sum(r.iter().map(|&x| e(x)))),
        mu2_shifted: pi * r2s * (compensated_sum(r.iter().map(|&x| x * x)) - T::one()),
        j2,
    }
}

/// Residuals of the six pullback identities of `φ`, each relative to
/// `max(1, largest displayed entry)`.
#[derive(Clone, Debug)]
pub struct PhiPullbackReport<T> {
    pub omega1: T,
    /// `φ*ω̃1` against the display with its sign reversed.
    pub omega1_sign_flipped: T,
    pub omega2: T,
    pub metric: T,
    pub mu1: T,
    pub mu2: T,
    pub j2: T,
    /// `‖(φ*J̃2)² + Id‖` on the `(r, η)` block.
    pub j2_square: T,
}

impl<T: Real> PhiPullbackReport<T> {
    pub fn entries(&self) -> [(&'static str, T); 6] {
        [
            ("phi_omega1", self.omega1),
            ("phi_omega2", self.omega2),
            ("phi_metric", self.metric),
            ("phi_mu1", self.mu1),
            ("phi_mu2", self.mu2),
            ("phi_J2", self.j2),
        ]
    }

    pub fn max(&self) -> T {
        self.entries().iter().fold(T::zero(), |a, (_, v)| a.max(*v))
    }
}

fn rel_max<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    let scale = b.iter().fold(T::one(), |m, x| m.max(x.abs()));
    (a - b).iter().fold(T::zero(), |m, x| m.max(x.abs())) / scale
}

fn rel<T: Real>(a: T, b: T) -> T {
    (a - b).abs() / b.abs().max(T::one())
}

fn rn_eta_block(n: usize) -> Vec<usize> {
    (0..=n).map(|i| r_index(n, i)).chain((0..=n).map(|i| eta_index(n, i))).collect()
}

/// Pulls back `ω̃1, ω̃2, g̃, μ1, μ2, J̃2` through `φ` using its analytic
/// Jacobian and compares with the closed-form displays.
pub fn phi_pullback_check<T: Real>(p: &AmbientPoint<T>, rho1: T, rho2: T) -> PhiPullbackReport<T> {
    let n = p.n();
    let q = phi_map(p, rho1, rho2);
    let jac = phi_jacobian(p, rho1, rho2);
    let t = ambient_tensors_at(&q);
    let pull = |a: &DMatrix<T>| jac.transpose() * a * &jac;
    let shown = phi_pullback_displays(p, rho1, rho2);
    let o1 = pull(&t.omega1);
    let k1 = -T::pi() * rho1 * rho1;
    let k2 = T::pi() * (rho2 * rho2 - from_usize::<T>(n + 1) / four_pi_sq::<T>() * (rho1 * rho1).ln());
    let (m1, m2) = moment_map(&q);
    let jinv = DMatrix::from_diagonal(&jac.diagonal().map(|x| T::one() / x));
    let j2 = &jinv * ambient_j2(q.r.as_slice()) * &jac;
    let idx = rn_eta_block(n);
    let block = j2.select_rows(&idx).select_columns(&idx);
    let sq = &block * &block + DMatrix::identity(idx.len(), idx.len());
    PhiPullbackReport {
        omega1: rel_max(&o1, &shown.omega1),
        omega1_sign_flipped: rel_max(&o1, &(-&shown.omega1)),
        omega2: rel_max(&pull(&t.omega2), &shown.omega2),
        metric: rel_max(&pull(&t.g), &shown.metric),
        mu1: rel(-k1 + m1, shown.mu1_shifted),
        mu2: rel(m2 - k2, shown.mu2_shifted),
        j2: rel_max(&j2, &shown.j2),
        j2_square: sq.iter().fold(T::zero(), |m, x| m.max(x.abs())),
    }
}

/// `J_{λ1,λ2}` on the `(r̄, η̄)` block, ordered `(∂r_0..∂r_n, ∂η_0..∂η_n)`:
/// `∂r_i ↦ A_i ∂η_i`, `∂η_i ↦ -B_i ∂r_i` with
/// `A_i = 8π³ r_i λ1²λ2² e^{-4π²λ2²r_i²}` and `B_i = 1/A_i`.
#[derive(Clone, Debug)]
pub struct ComplexStructureAt<T: Real> {
    pub j: DMatrix<T>,
    pub lambda1: T,
    pub lambda2: T,
    pub r: DVector<T>,
}

impl<T: Real> ComplexStructureAt<T> {
    pub fn n(&self) -> usize {
        self.r.len() - 1
    }

    pub fn coefficient_a(&self, i: usize) -> T {
        self.j[(self.n() + 1 + i, i)]
    }

    pub fn coefficient_b(&self, i: usize) -> T {
        -self.j[(i, self.n() + 1 + i)]
    }

    /// `‖J² + Id‖_max`.
    pub fn square_residual(&self) -> T {
        let k = self.j.nrows();
        (&self.j * &self.j + DMatrix::identity(k, k)).iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// `2πλ2² Σ r_i dr_i ∧ dη_i`, the `λ2²`-scaled Fubini-Study form in this chart.
    pub fn kahler_form(&self) -> DMatrix<T> {
        let k = self.r.len();
        let mut o = DMatrix::zeros(2 * k, 2 * k);
        for i in 0..k {
            let c = T::two_pi() * self.lambda2 * self.lambda2 * self.r[i];
            o[(i, k + i)] = c;
            o[(k + i, i)] = -c;
        }
        o
    }

    /// `max |Jᵀ Ω J - Ω|` relative to `max |Ω|`, i.e. `ω(J·, J·) = ω(·, ·)`.
    pub fn compatibility_residual(&self) -> T {
        let o = self.kahler_form();
        rel_max(&(self.j.transpose() * &o * &self.j), &o)
    }

    /// Smallest `ω(v, Jv)` over the coordinate vectors (positive when tamed).
    pub fn taming_margin(&self) -> T {
        let o = self.kahler_form();
        let k = o.nrows();
        (0..k).fold(T::max_value().unwrap_or(lit(f64::MAX)), |m, a| {
            let e = DVector::from_fn(k, |i, _| if i == a { T::one() } else { T::zero() });
            m.min(e.dot(&(&o * (&self.j * &e))))
        })
    }
}

pub fn complex_structure_at<T: Real>(r: &[T], lambda1: T, lambda2: T) -> Result<ComplexStructureAt<T>> {
    if let Some(i) = r.iter().position(|&x| !(x > T::zero())) {
        return Err(Error::Domain(format!("r_{i} = {} lies on the singular locus ∏ r_i = 0", r[i])));
    }
    if !(lambda1 > T::zero() && lambda2 > T::zero()) {
        return Err(Error::InvalidParameter(format!("lambda1, lambda2 must be positive, got {lambda1}, {lambda2}")));
    }
    let k = r.len();
    let pi = T::pi();
    let mut j = DMatrix::zeros(2 * k, 2 * k);
    for (i, &ri) in r.iter().enumerate() {
        let a = lit::<T>(8.0) * pi * pi * pi * ri * lambda1 * lambda1 * lambda2 * lambda2
            * (-four_pi_sq::<T>() * lambda2 * lambda2 * ri * ri).exp();
        j[(k + i, i)] = a;
        j[(i, k + i)] = -T::one() / a;
    }
    Ok(ComplexStructureAt { j, lambda1, lambda2, r: DVector::from_column_slice(r) })
}

/// `α_t(k1, k2) = (t² k1, k2 - ((n+1)/2π) log t)`.
pub fn alpha_deform<T: Real>(spec: &LevelSetSpec<T>, t: T) -> Result<LevelSetSpec<T>> {
    if !(t > T::zero()) {
        return Err(Error::InvalidParameter(format!("deformation parameter t = {t} must be positive")));
    }
    LevelSetSpec::from_levels(
        spec.n,
        t * t * spec.k1,
        spec.k2 - from_usize::<T>(spec.n + 1) / T::two_pi() * t.ln(),
    )
}

/// `ψ_t(θ̄, r̄, η̄) = (θ̄, t r̄, η̄)`.
pub fn psi_scale<T: Real>(p: &AmbientPoint<T>, t: T) -> Result<AmbientPoint<T>> {
    if !(t > T::zero()) {
        return Err(Error::InvalidParameter(format!("deformation parameter t = {t} must be positive")));
    }
    AmbientPoint::new(p.theta.clone(), &p.r * t, p.eta.clone())
}

/// `ψ_t` on a reduced point, landing on the `α_t`-deformed level set.
pub fn psi_scale_reduced<T: Real>(p: &ReducedPoint<T>, t: T) -> Result<ReducedPoint<T>> {
    let spec = alpha_deform(&p.spec, t)?;
    ReducedPoint::new(spec, &p.base_r * t, p.s.clone(), p.t.clone())
}

/// The deformed structure `(ω̃1)_t, (ω̃2)_t, g̃_t, (ω̃D)_t` at `p`.
pub fn deformed_tensors_at<T: Real>(p: &AmbientPoint<T>, t: T) -> [DMatrix<T>; 4] {
    let r = p.r.as_slice();
    let t2 = t * t;
    let mut g = metric_matrix(r);
    let n = p.n();
    for i in 0..=n {
        g[(theta_index(n, i), theta_index(n, i))] *= t2;
        g[(r_index(n, i), r_index(n, i))] *= t2;
        g[(eta_index(n, i), eta_index(n, i))] /= t2;
    }
    [form_matrix(FormId::Omega1, r) * t2, form_matrix(FormId::Omega2, r), g, form_matrix(FormId::OmegaD, r)]
}

/// Largest relative deviation of `ψ_t^*(ω̃1, ω̃2, g̃, ω̃D)` from the deformed
/// displays.
pub fn psi_pullback_residual<T: Real>(p: &AmbientPoint<T>, t: T) -> Result<T> {
    let q = psi_scale(p, t)?;
    let n = p.n();
    let mut jac = DMatrix::identity(p.dim(), p.dim());
    for i in 0..=n {
        jac[(r_index(n, i), r_index(n, i))] = t;
    }
    let at_q = ambient_tensors_at(&q);
    let pulled = [&at_q.omega1, &at_q.omega2, &at_q.g, &at_q.omega_d].map(|a| jac.transpose() * a * &jac);
    let shown = deformed_tensors_at(p, t);
    Ok(pulled.iter().zip(&shown).fold(T::zero(), |m, (a, b)| m.max(rel_max(a, b))))
}

fn section_int_maps(n: usize) -> (IntMatrix<i64>, IntMatrix<i64>) {
    let m = lattice_maps::<i64>(n).expect("n >= 1");
    (m.forward.matrix, m.dual_forward.matrix)
}

fn apply<T: Real>(m: &IntMatrix<i64>, v: &DVector<T>) -> DVector<T> {
    DVector::from_fn(m.nrows(), |i, _| (0..m.ncols()).fold(T::zero(), |a, j| a + lit::<T>(m[(i, j)] as f64) * v[j]))
}

/// First torus factor acting through a lift `s1 ∈ R^{n+1}`; the point is
/// returned to the section translate by the `N_{Δn}` correction, which in
/// torus coordinates reads `s ↦ s + F_{Δn} s1 / (n+1)`.
pub fn act_first<T: Real>(p: &ReducedPoint<T>, s1: &DVector<T>) -> ReducedPoint<T> {
    let (f, _) = section_int_maps(p.n());
    let k = from_usize::<T>(p.n() + 1);
    ReducedPoint { s: &p.s + apply(&f, s1) / k, ..p.clone() }
}

/// Second torus factor: `t ↦ t + F_{Δn*} s2 / (n+1)`.
pub fn act_second<T: Real>(p: &ReducedPoint<T>, s2: &DVector<T>) -> ReducedPoint<T> {
    let (_, fd) = section_int_maps(p.n());
    let k = from_usize::<T>(p.n() + 1);
    ReducedPoint { t: &p.t + apply(&fd, s2) / k, ..p.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    #[test]
    fn fs_distance_examples() {
        let z = [c(1.0, 0.0), c(0.0, 0.0)];
        let w = [c(0.0, 0.0), c(1.0, 0.0)];
        assert!((fubini_study_distance(&z, &w, 1.0) - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(fubini_study_distance(&z, &z, 1.0), 0.0);
        let zp = [c(0.0, 3.0), c(0.0, 0.0)];
        assert_eq!(fubini_study_distance(&z, &zp, 1.0), 0.0);
    }

    #[test]
    fn pi1_residual_examples() {
        let rho2 = 0.4;
        let z = [c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.5)];
        let want = (-4.0 * PI * PI * rho2 * rho2).exp();
        assert!((pi1_image_residual(&z, rho2) - want).abs() < 1e-15);
        let w: Vec<_> = [c(0.3, 0.1), c(0.7, -0.2), c(0.2, 0.9)].to_vec();
        let w3: Vec<_> = w.iter().map(|x| x * c(2.5, -1.0)).collect();
        assert!((pi1_image_residual(&w, rho2) - pi1_image_residual(&w3, rho2)).abs() < 1e-12);
    }

    #[test]
    fn pi2_residual_examples() {
        let a = ((3f64).ln() / (4.0 * PI * PI)).sqrt();
        let z = [c(a, 0.0), c(0.0, a), c(-a, 0.0)];
        assert!(pi2_image_residual(&z) < 1e-15);
        assert!((pi2_image_residual(&[c(0.0, 0.0); 3]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn phi_round_trip_and_domain() {
        let p = AmbientPoint::from_slices(&[0.1, 0.2, 0.3], &[0.4, 1.2, 0.05], &[0.7, 0.1, 0.9]).unwrap();
        let q = phi_map(&p, 2.0, 0.5);
        let back = phi_inverse(&q, 2.0, 0.5).unwrap();
        assert!((&back.r - &p.r).amax() < 1e-12);
        assert!((&back.eta - &p.eta).amax() < 1e-12);
        assert!(phi_inverse(&p, 1.0, 0.5).is_err());
    }

    #[test]
    fn phi_pullbacks() {
        let p = AmbientPoint::from_slices(&[0.0, 0.0, 0.0], &[0.4, 0.9, 0.2], &[0.0; 3]).unwrap();
        let rep = phi_pullback_check(&p, 1.3, 0.6);
        assert!(rep.omega2 < 1e-12 && rep.metric < 1e-12 && rep.mu1 < 1e-12 && rep.mu2 < 1e-12 && rep.j2 < 1e-12);
        assert!(rep.j2_square < 1e-12);
        assert!(rep.omega1_sign_flipped < 1e-12);
        assert!(rep.omega1 > 1e-3);
    }

    #[test]
    fn complex_structure_examples() {
        let j = complex_structure_at(&[0.3, 0.8], 1.0, 0.5).unwrap();
        assert!(j.square_residual() < 1e-12);
        assert!(j.compatibility_residual() < 1e-12);
        assert!(j.taming_margin() > 0.0);
        let a = 8.0 * PI.powi(3) * 0.3 * 0.25 * (-4.0 * PI * PI * 0.25 * 0.09f64).exp();
        assert!((j.coefficient_a(0) - a).abs() < 1e-12);
        let small = complex_structure_at(&[0.3, 0.8], 1e-3, 0.5).unwrap();
        assert!((small.coefficient_b(0) / j.coefficient_b(0) - 1e6).abs() < 1e-3);
        assert!(complex_structure_at(&[0.0, 1.0], 1.0, 0.5).is_err());
    }

    #[test]
    fn alpha_composes() {
        let spec = LevelSetSpec::<f64>::from_rho(2, 1.5, 0.6).unwrap();
        let a = alpha_deform(&alpha_deform(&spec, 2.0).unwrap(), 3.0).unwrap();
        let b = alpha_deform(&spec, 6.0).unwrap();
        assert!((a.k1 - b.k1).abs() < 1e-12 * b.k1.abs() && (a.k2 - b.k2).abs() < 1e-12);
        let (r1, r2) = alpha_deform(&spec, 4.0).unwrap().rho().unwrap();
        assert!((r1 - 6.0).abs() < 1e-12 && (r2 - 0.6).abs() < 1e-12);
        assert!(alpha_deform(&spec, 0.0).is_err());
    }

    #[test]
    fn hn_group_for_n2() {
        let g = HnQuotient::<f64>::new(2).unwrap();
        assert_eq!(g.order_of_finite_part(), 3);
        assert!(g.circle_is_diagonal);
    }
}

//! The reduced manifolds `X̃^{n-1}_{k1,k2}`: feasibility, the base level set
//! `B = {Σ r² = ρ1², ∏ r = e^{-2πk2}}`, reduced points on translates of the
//! section, the tangent frame of the main construction and the induced WSD
//! structure.

use std::fmt;

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::ambient::{
    ambient_tensors_at, auxiliary_vectors, convert_parameters, eta_index, levels_from_rho, metric_matrix,
    moment_map, r_index, theta_index, AmbientPoint,
};
use crate::error::{Error, Result};
use crate::polytope::{lattice_maps, IntMatrix};
use crate::scalar::{compensated_sum, from_usize, lit, to_f64, Real};
use crate::wsd::WsdStructureAt;

pub use crate::wsd::{verify_wsd_axioms, AxiomReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Feasibility {
    Empty,
    Degenerate,
    Regular,
}

impl fmt::Display for Feasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Feasibility::Empty => "empty",
            Feasibility::Degenerate => "degenerate",
            Feasibility::Regular => "regular",
        })
    }
}

/// `ρ2²` at which the level set degenerates to one orbit:
/// `(n+1) log(n+1) / 4π²`.
pub fn threshold_rho2_sq<T: Real>(n: usize) -> T {
    let k = from_usize::<T>(n + 1);
    k * k.ln() / (T::two_pi() * T::two_pi())
}

/// Relative tolerance used to call a level set degenerate.
pub const FEASIBILITY_REL_TOL: f64 = 1e-12;

/// Classifies `(-k1/π) e^{4πk2/(n+1)}` against `n+1`, compared in log form.
pub fn classify_levels<T: Real>(n: usize, k1: T, k2: T) -> Feasibility {
    if !(k1 < T::zero()) {
        return Feasibility::Empty;
    }
    let k = from_usize::<T>(n + 1);
    let lhs = (-k1 / T::pi()).ln() + lit::<T>(4.0) * T::pi() * k2 / k;
    let rhs = k.ln();
    let tol = lit::<T>(FEASIBILITY_REL_TOL) * rhs.abs().max(T::one());
    if (lhs - rhs).abs() <= tol {
        Feasibility::Degenerate
    } else if lhs > rhs {
        Feasibility::Regular
    } else {
        Feasibility::Empty
    }
}

/// Level set `μ1 = k1`, `μ2 = k2` in dimension `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelSetSpec<T: Real> {
    pub n: usize,
    pub k1: T,
    pub k2: T,
}

impl<T: Real> LevelSetSpec<T> {
    pub fn from_levels(n: usize, k1: T, k2: T) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDimension(format!("n must be >= 1, got {n}")));
        }
        Ok(Self { n, k1, k2 })
    }

    pub fn from_rho(n: usize, rho1: T, rho2: T) -> Result<Self> {
        let (k1, k2) = levels_from_rho(n, rho1, rho2)?;
        Ok(Self { n, k1, k2 })
    }

    /// `(ρ1, ρ2)`; fails outside the chart (`ρ2² < 0`).
    pub fn rho(&self) -> Result<(T, T)> {
        convert_parameters(self.n, self.k1, self.k2)
    }

    pub fn rho1(&self) -> T {
        (-self.k1 / T::pi()).sqrt()
    }

    /// `ρ2²`, possibly negative outside the chart.
    pub fn rho2_sq(&self) -> T {
        from_usize::<T>(self.n + 1) / (T::two_pi() * T::two_pi()) * (-self.k1 / T::pi()).ln() + self.k2 / T::pi()
    }

    pub fn classification(&self) -> Feasibility {
        classify_levels(self.n, self.k1, self.k2)
    }

    pub fn require_regular(&self) -> Result<()> {
        match self.classification() {
            Feasibility::Regular => Ok(()),
            c => Err(Error::Infeasible { classification: c }),
        }
    }

    /// Target value of `Σ log r_i`, i.e. `log e^{-2πk2}`.
    pub fn log_product(&self) -> T {
        -T::two_pi() * self.k2
    }
}

pub fn feasibility<T: Real>(spec: &LevelSetSpec<T>) -> Feasibility {
    spec.classification()
}

/// Relative residuals `(|Σr²/ρ1² - 1|, |∏r / e^{-2πk2} - 1|)` of a base point.
pub fn base_residuals<T: Real>(spec: &LevelSetSpec<T>, r: &DVector<T>) -> (T, T) {
    let rho1_sq = -spec.k1 / T::pi();
    let s = compensated_sum(r.iter().map(|&x| x * x));
    let l = compensated_sum(r.iter().map(|&x| x.ln()));
    ((s / rho1_sq - T::one()).abs(), (l - spec.log_product()).exp_m1().abs())
}

const MAX_RETRIES: usize = 16;
const NEWTON_ITERS: usize = 50;

/// Unique `λ > 0` with `Σ exp(2(c0 + λ d_i)) = 1`, for `Σ d = 0`, `d ≠ 0` and
/// `(n+1) e^{2 c0} <= 1`. The left side is convex and increasing in `λ > 0`,
/// so Newton from a point beyond the root decreases monotonically onto it.
fn ray_root<T: Real>(c0: T, d: &[T]) -> Option<T> {
    let two = lit::<T>(2.0);
    let f = |l: T| -> (T, T) {
        let mut v = T::zero();
        let mut dv = T::zero();
        for &di in d {
            let e = (two * (c0 + l * di)).exp();
            v += e;
            dv += two * di * e;
        }
        (v - T::one(), dv)
    };
    let mut hi = T::one();
    let mut guard = 0;
    while f(hi).0 <= T::zero() {
        hi *= two;
        guard += 1;
        if guard > 200 {
            return None;
        }
    }
    let mut l = hi;
    for _ in 0..200 {
        let (v, dv) = f(l);
        if !(dv > T::zero()) {
            return None;
        }
        let next = l - v / dv;
        if !(next < l) || next <= T::zero() {
            return Some(if next > T::zero() { next.min(l) } else { l });
        }
        l = next;
    }
    Some(l)
}

/// Damped Gauss-Newton projection of `s` onto `{Σ s² = 1, Σ log s = c}`
/// using the minimum-norm (pseudo-inverse) step.
fn newton_project<T: Real>(s: &mut DVector<T>, c: T) -> bool {
    let tol = lit::<T>(1e-12);
    let resid = |s: &DVector<T>| {
        (
            compensated_sum(s.iter().map(|&x| x * x)) - T::one(),
            compensated_sum(s.iter().map(|&x| x.ln())) - c,
        )
    };
    let norm = |(a, b): (T, T)| (a * a + b * b).sqrt();
    let mut r = resid(s);
    for _ in 0..NEWTON_ITERS {
        if r.0.abs() < tol && r.1.abs() < tol * c.abs().max(T::one()) {
            return true;
        }
        let j1 = s.map(|x| lit::<T>(2.0) * x);
        let j2 = s.map(|x| T::one() / x);
        let (a, b, d) = (j1.dot(&j1), j1.dot(&j2), j2.dot(&j2));
        let det = a * d - b * b;
        if !(det.abs() > T::zero()) {
            return false;
        }
        // step = -J^T (J J^T)^{-1} r
        let y0 = (d * r.0 - b * r.1) / det;
        let y1 = (a * r.1 - b * r.0) / det;
        let step = -(j1 * y0 + j2 * y1);
        let mut alpha = T::one();
        let current = norm(r);
        let mut accepted = false;
        for _ in 0..30 {
            let trial = &*s + &step * alpha;
            if trial.iter().all(|&x| x > T::zero()) {
                let rt = resid(&trial);
                if norm(rt) < current || norm(rt) < tol {
                    *s = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            alpha *= lit::<T>(0.5);
        }
        if !accepted {
            return r.0.abs() < tol && r.1.abs() < tol * c.abs().max(T::one());
        }
    }
    r.0.abs() < tol && r.1.abs() < tol * c.abs().max(T::one())
}

/// Normalized base point `s = r/ρ1` along the log-space direction `d`
/// (`Σ d = 0`) from the symmetric point.
fn base_point_along<T: Real>(n: usize, c: T, d: &[T]) -> Option<DVector<T>> {
    let k = from_usize::<T>(n + 1);
    let c0 = c / k;
    let lambda = if (k * (lit::<T>(2.0) * c0).exp() - T::one()).abs() <= T::default_epsilon() {
        T::zero()
    } else {
        ray_root(c0, d)?
    };
    let mut s = DVector::from_iterator(n + 1, d.iter().map(|&di| (c0 + lambda * di).exp()));
    newton_project(&mut s, c).then_some(s)
}

fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Random unit direction in the hyperplane `Σ d = 0` of `R^{n+1}`.
fn hyperplane_direction<T: Real>(n: usize, rng: &mut ChaCha8Rng) -> Option<Vec<T>> {
    let mut g: Vec<f64> = (0..=n).map(|_| rng.sample(StandardNormal)).collect();
    let mean = g.iter().sum::<f64>() / (n + 1) as f64;
    g.iter_mut().for_each(|x| *x -= mean);
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 1e-8).then(|| g.iter().map(|&x| lit::<T>(x / norm)).collect())
}

/// For `n = 1` the base is the two points with `r²` the roots of
/// `q² - ρ1² q + e^{-4πk2} = 0`, larger radius first.
pub fn base_solutions_n1<T: Real>(spec: &LevelSetSpec<T>) -> Result<[DVector<T>; 2]> {
    if spec.n != 1 {
        return Err(Error::InvalidDimension(format!("closed form is for n = 1, got {}", spec.n)));
    }
    spec.require_regular()?;
    let rho1_sq = -spec.k1 / T::pi();
    let p = (lit::<T>(2.0) * spec.log_product()).exp();
    let disc = (rho1_sq * rho1_sq - lit::<T>(4.0) * p).sqrt();
    let q_big = (rho1_sq + disc) / lit::<T>(2.0);
    let q_small = p / q_big;
    let (a, b) = (q_big.sqrt(), q_small.sqrt());
    Ok([DVector::from_column_slice(&[a, b]), DVector::from_column_slice(&[b, a])])
}

/// `count` points of the base `B`, deterministic in `(seed, index)`.
///
/// Proposals are directions drawn uniformly on the unit sphere of the
/// log-space hyperplane `Σ log s_i = const` through the symmetric point; each
/// is pushed along its ray onto `Σ s² = 1` and polished by Newton projection
/// onto both constraints. For `n = 1` the base is finite and the two points
/// alternate.
pub fn sample_base<T: Real>(spec: &LevelSetSpec<T>, count: usize, seed: u64) -> Result<Vec<DVector<T>>> {
    spec.require_regular()?;
    let n = spec.n;
    let rho1 = spec.rho1();
    if n == 1 {
        let sols = base_solutions_n1(spec)?;
        return Ok((0..count).map(|i| sols[i % 2].clone()).collect());
    }
    let c = spec.log_product() - from_usize::<T>(n + 1) * rho1.ln();
    (0..count)
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            for _ in 0..MAX_RETRIES {
                let Some(d) = hyperplane_direction::<T>(n, &mut rng) else { continue };
                if let Some(s) = base_point_along(n, c, &d) {
                    return Ok(s * rho1);
                }
            }
            Err(Error::ConvergenceFailure { attempts: MAX_RETRIES })
        })
        .collect()
}

/// A point of `X̃`: base radii plus torus coordinates `(s, t) ∈ R^n × R^n`
/// placing it at `(θ̄, η̄) = (F*_{Δn*} s, F*_{Δn} t)` relative to the section.
#[derive(Clone, Debug)]
pub struct ReducedPoint<T: Real> {
    pub spec: LevelSetSpec<T>,
    pub base_r: DVector<T>,
    pub s: DVector<T>,
    pub t: DVector<T>,
}

/// `(F*_{Δn*}, F*_{Δn})`, the `(n+1) × n` integer matrices placing the torus
/// coordinates into `θ̄` and `η̄`.
pub fn section_maps(n: usize) -> Result<(IntMatrix<i64>, IntMatrix<i64>)> {
    let m = lattice_maps::<i64>(n)?;
    Ok((m.dual_forward_t.matrix, m.forward_t.matrix))
}

fn apply_int<T: Real>(m: &IntMatrix<i64>, v: &DVector<T>) -> DVector<T> {
    DVector::from_iterator(
        m.nrows(),
        (0..m.nrows()).map(|i| (0..m.ncols()).fold(T::zero(), |acc, j| acc + lit::<T>(m[(i, j)] as f64) * v[j])),
    )
}

impl<T: Real> ReducedPoint<T> {
    pub fn new(spec: LevelSetSpec<T>, base_r: DVector<T>, s: DVector<T>, t: DVector<T>) -> Result<Self> {
        let n = spec.n;
        if base_r.len() != n + 1 || s.len() != n || t.len() != n {
            return Err(Error::InvalidDimension(format!(
                "reduced point needs {} radii and {n}+{n} torus coordinates",
                n + 1
            )));
        }
        Ok(Self { spec, base_r, s, t })
    }

    pub fn on_section(spec: LevelSetSpec<T>, base_r: DVector<T>) -> Result<Self> {
        let n = spec.n;
        Self::new(spec, base_r, DVector::zeros(n), DVector::zeros(n))
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn theta(&self) -> DVector<T> {
        let (fd, _) = section_maps(self.n()).expect("n >= 1");
        apply_int(&fd, &self.s)
    }

    pub fn eta(&self) -> DVector<T> {
        let (_, f) = section_maps(self.n()).expect("n >= 1");
        apply_int(&f, &self.t)
    }

    pub fn embed(&self) -> AmbientPoint<T> {
        AmbientPoint::new(self.theta(), self.base_r.clone(), self.eta()).expect("validated radii")
    }

    /// `max(|μ1 - k1|, |μ2 - k2|)` relative to `max(1, |k|)`.
    pub fn moment_residual(&self) -> T {
        let (m1, m2) = moment_map(&self.embed());
        let rel = |a: T, b: T| (a - b).abs() / b.abs().max(T::one());
        rel(m1, self.spec.k1).max(rel(m2, self.spec.k2))
    }
}

/// Base samples with uniformly random torus coordinates in `[0, 1)^n`.
pub fn sample_reduced_points<T: Real>(spec: &LevelSetSpec<T>, count: usize, seed: u64) -> Result<Vec<ReducedPoint<T>>> {
    let base = sample_base(spec, count, seed)?;
    let n = spec.n;
    Ok(base
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut rng = stream_rng(seed ^ 0x9e37_79b9_7f4a_7c15, i as u64);
            let s = DVector::from_fn(n, |_, _| lit::<T>(rng.random::<f64>()));
            let t = DVector::from_fn(n, |_, _| lit::<T>(rng.random::<f64>()));
            ReducedPoint { spec: *spec, base_r: r, s, t }
        })
        .collect())
}

/// Tangent frame of `X̃` at a point, in ambient coordinate components.
#[derive(Clone, Debug)]
pub struct TangentFrame<T: Real> {
    pub v: Vec<DVector<T>>,
    pub u1: Vec<DVector<T>>,
    pub w2: Vec<DVector<T>>,
    /// `X1 - (⟨X1,X2⟩/‖X2‖²) X2`.
    pub degenerate_x: DVector<T>,
    /// `Y1 - (⟨Y1,Y2⟩/‖Y2‖²) Y2`.
    pub degenerate_y: DVector<T>,
}

impl<T: Real> TangentFrame<T> {
    pub fn m(&self) -> usize {
        self.v.len()
    }

    /// All `3m + 2` vectors as columns, order `(v, u¹, w², X-pair, Y-pair)`.
    pub fn matrix(&self) -> DMatrix<T> {
        let cols: Vec<DVector<T>> = self
            .v
            .iter()
            .chain(&self.u1)
            .chain(&self.w2)
            .cloned()
            .chain([self.degenerate_x.clone(), self.degenerate_y.clone()])
            .collect();
        DMatrix::from_columns(&cols)
    }
}

fn near_degenerate_guard<T: Real>(product: T, n: usize) -> Result<()> {
    let k2 = from_usize::<T>((n + 1) * (n + 1));
    if product - k2 > lit::<T>(1e-8) * k2 {
        Ok(())
    } else {
        Err(Error::NearDegenerate(format!(
            "‖X1‖²‖X2‖² - (n+1)² = {} is below 1e-8 (n+1)²",
            to_f64(product - k2)
        )))
    }
}

/// Orthonormal basis of `{a ∈ R^{n+1} : Σ r_i a_i = 0, Σ a_i / r_i = 0}`,
/// completed by Gram-Schmidt from seeded random vectors.
fn v_space_basis<T: Real>(r: &DVector<T>, seed: u64) -> Vec<DVector<T>> {
    let k = r.len();
    let m = k.saturating_sub(2);
    let mut basis: Vec<DVector<T>> = Vec::with_capacity(k);
    let push_orth = |basis: &mut Vec<DVector<T>>, mut x: DVector<T>| -> bool {
        for _ in 0..2 {
            for b in basis.iter() {
                let c = b.dot(&x);
                x -= b * c;
            }
        }
        let nx = x.norm();
        if nx > lit::<T>(1e-10) {
            basis.push(x / nx);
            true
        } else {
            false
        }
    };
    push_orth(&mut basis, r.clone());
    push_orth(&mut basis, r.map(|x| T::one() / x));
    let fixed = basis.len();
    let mut rng = stream_rng(seed, u64::MAX);
    let mut guard = 0;
    while basis.len() < fixed + m && guard < 100 * (m + 1) {
        let g = DVector::from_fn(k, |_, _| lit::<T>(rng.sample::<f64, _>(StandardNormal)));
        push_orth(&mut basis, g);
        guard += 1;
    }
    basis.split_off(fixed)
}

/// The basis `v_i, u¹_i, w²_i` (`i < n-1`) and the degenerate pair spanning
/// `T_p X̃ = ⟨X2, Y2⟩^⊥ ∩ ker dμ1 ∩ ker dμ2`.
pub fn reduced_tangent_frame<T: Real>(p: &ReducedPoint<T>) -> Result<TangentFrame<T>> {
    reduced_tangent_frame_seeded(p, 0)
}

pub fn reduced_tangent_frame_seeded<T: Real>(p: &ReducedPoint<T>, seed: u64) -> Result<TangentFrame<T>> {
    p.spec.require_regular()?;
    let n = p.n();
    let q = p.embed();
    let aux = auxiliary_vectors(&q);
    near_degenerate_guard(aux.product, n)?;
    let r = &p.base_r;
    let d = q.dim();
    let two_pi = T::two_pi();
    let mut v = Vec::new();
    let mut u1 = Vec::new();
    let mut w2 = Vec::new();
    for a in v_space_basis(r, seed) {
        let mut vi = DVector::zeros(d);
        let mut ui = DVector::zeros(d);
        let mut wi = DVector::zeros(d);
        for j in 0..=n {
            vi[r_index(n, j)] = a[j];
            ui[theta_index(n, j)] = a[j] / (two_pi * r[j]);
            wi[eta_index(n, j)] = two_pi * r[j] * a[j];
        }
        v.push(vi);
        u1.push(ui);
        w2.push(wi);
    }
    let degenerate_x = &aux.x1 - &aux.x2 * (aux.inner_x / aux.norm2_x2);
    let degenerate_y = &aux.y1 - &aux.y2 * (aux.inner_y / aux.norm2_y2);
    Ok(TangentFrame { v, u1, w2, degenerate_x, degenerate_y })
}

/// Adapted frame `(x = v, y¹ = u¹, y² = w², z, w)` with `z` the unit
/// X-pair vector and `w` the Y-pair vector scaled so that `ωD(z, w) = 1`.
pub fn adapted_frame<T: Real>(frame: &TangentFrame<T>, p: &ReducedPoint<T>) -> DMatrix<T> {
    let q = p.embed();
    let t = ambient_tensors_at(&q);
    let a = &frame.degenerate_x;
    let z = a / a.dot(&(&t.g * a)).sqrt();
    let b = &frame.degenerate_y;
    let w = b / z.dot(&(&t.omega_d * b));
    let cols: Vec<DVector<T>> =
        frame.v.iter().chain(&frame.u1).chain(&frame.w2).cloned().chain([z, w]).collect();
    DMatrix::from_columns(&cols)
}

/// Restriction of the ambient structure to `T_p X̃` in the adapted frame.
pub fn induced_structure_at<T: Real>(p: &ReducedPoint<T>) -> Result<WsdStructureAt<T>> {
    induced_structure_at_seeded(p, 0)
}

pub fn induced_structure_at_seeded<T: Real>(p: &ReducedPoint<T>, seed: u64) -> Result<WsdStructureAt<T>> {
    let frame = reduced_tangent_frame_seeded(p, seed)?;
    let f = adapted_frame(&frame, p);
    let t = ambient_tensors_at(&p.embed());
    Ok(WsdStructureAt::restrict(f, frame.m(), true, &t.g, &t.omega1, &t.omega2, &t.omega_d))
}

/// Coefficients of `ω̃D` on `⟨X1, X2, Y1, Y2⟩` in the coframe of metric duals,
/// and the pairing of the degenerate vectors computed several ways.
#[derive(Clone, Debug)]
pub struct DegenerateBlock<T> {
    /// `(a11, a12, a21, a22)` from a 4×4 LU solve.
    pub linear: [T; 4],
    /// `(a11, a12, a21, a22)` from the closed forms.
    pub closed: [T; 4],
    /// Largest `|linear - closed|`.
    pub agreement: T,
    /// Largest deviation of `Σ a_kl X_k*(X_i) Y_l*(Y_j)` from `ω̃D(X_i, Y_j)`.
    pub expansion_residual: T,
    /// `‖X1‖²‖X2‖²`.
    pub product: T,
    /// `ω̃D` evaluated directly on the two degenerate vectors.
    pub pairing_direct: T,
    /// The same pairing through the `a_ij` expansion.
    pub pairing_expansion: T,
    /// `(n+1)/(‖X1‖²‖X2‖²)`.
    pub pairing_formula: T,
    /// `|ω̃D(a, b)| / (‖a‖²‖b‖²)`: the coefficient of `ωD` against the
    /// metric-dual coframe `a♭ ∧ b♭` of the degenerate pair.
    pub dual_coframe_norm: T,
    /// `(n+1)/(‖X1‖²‖X2‖² - (n+1)²)`.
    pub norm_formula: T,
    /// `|ω̃D(a/‖a‖, b/‖b‖)|`, the pairing on the unit degenerate vectors.
    pub orthonormal_norm: T,
}

impl<T: Real> DegenerateBlock<T> {
    pub fn pairing_residual(&self) -> T {
        (self.pairing_direct - self.pairing_formula).abs()
    }

    pub fn norm_residual(&self) -> T {
        (self.dual_coframe_norm - self.norm_formula).abs()
    }

    pub fn expansion_vs_direct(&self) -> T {
        (self.pairing_expansion - self.pairing_direct).abs()
    }
}

pub fn omega_d_degenerate_block<T: Real>(p: &ReducedPoint<T>) -> Result<DegenerateBlock<T>> {
    p.spec.require_regular()?;
    let n = p.n();
    let q = p.embed();
    let aux = auxiliary_vectors(&q);
    near_degenerate_guard(aux.product, n)?;
    let g = metric_matrix(q.r.as_slice());
    let od = ambient_tensors_at(&q).omega_d;
    let k = from_usize::<T>(n + 1);
    let (nx1, nx2) = (aux.norm2_x1, aux.norm2_x2);

    let sys = Matrix4::new(
        nx1, T::zero(), k, T::zero(),
        T::zero(), nx1, T::zero(), k,
        k, T::zero(), nx2, T::zero(),
        T::zero(), k, T::zero(), nx2,
    );
    let rhs = Vector4::new(T::zero(), T::one(), T::one(), T::zero());
    let sol = sys
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NearDegenerate("a_ij system is singular".into()))?;
    let linear = [sol[0], sol[1], sol[2], sol[3]];
    let den = k * k - nx1 * nx2;
    let closed = [k / den, -nx2 / den, -nx1 / den, k / den];
    let agreement = linear.iter().zip(&closed).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));

    let xs = [&aux.x1, &aux.x2];
    let ys = [&aux.y1, &aux.y2];
    let expand = |u: &DVector<T>, v: &DVector<T>| {
        let mut acc = T::zero();
        for (kk, xk) in xs.iter().enumerate() {
            for (ll, yl) in ys.iter().enumerate() {
                acc += closed[2 * kk + ll] * xk.dot(&(&g * u)) * yl.dot(&(&g * v));
            }
        }
        acc
    };
    let mut expansion_residual = T::zero();
    for xi in xs {
        for yj in ys {
            let direct = xi.dot(&(&od * yj));
            expansion_residual = expansion_residual.max((expand(xi, yj) - direct).abs() / direct.abs().max(T::one()));
        }
    }

    let a = &aux.x1 - &aux.x2 * (k / nx2);
    let b = &aux.y1 - &aux.y2 * (k / aux.norm2_y2);
    let pairing_direct = a.dot(&(&od * &b));
    let pairing_expansion = expand(&a, &b);
    let na2 = a.dot(&(&g * &a));
    let nb2 = b.dot(&(&g * &b));
    Ok(DegenerateBlock {
        linear,
        closed,
        agreement,
        expansion_residual,
        product: aux.product,
        pairing_direct,
        pairing_expansion,
        pairing_formula: k / aux.product,
        dual_coframe_norm: pairing_direct.abs() / (na2 * nb2),
        norm_formula: k / (aux.product - k * k),
        orthonormal_norm: pairing_direct.abs() / (na2 * nb2).sqrt(),
    })
}

/// Worst violation of the tangent-space characterization: every frame vector
/// is `g`-orthogonal to `X2`, `Y2` and annihilated by `dμ1`, `dμ2` (relative to
/// `‖dμ‖`).
pub fn tangent_frame_residual<T: Real>(frame: &TangentFrame<T>, p: &ReducedPoint<T>) -> T {
    let q = p.embed();
    let aux = auxiliary_vectors(&q);
    let (d1, d2) = crate::ambient::moment_map_differentials(&q);
    let (n1, n2) = (d1.norm(), d2.norm());
    let f = frame.matrix();
    let mut worst = T::zero();
    for c in f.column_iter() {
        worst = worst
            .max(c.dot(&aux.x2_dual).abs())
            .max(c.dot(&aux.y2_dual).abs())
            .max(c.dot(&d1).abs() / n1)
            .max(c.dot(&d2).abs() / n2);
    }
    worst
}

//! Finite metric geometry: sampled metric spaces, Hausdorff and
//! Gromov-Hausdorff bounds, the normalized GH distance, flat fiber tori and
//! the samplers for the comparison hypersurfaces.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::ambient::{metric_matrix, AmbientPoint};
use crate::error::{Error, Result};
use crate::maps::{fubini_study_distance, hn_distance, HnQuotient};
use crate::polytope::IntMatrix;
use crate::reduction::{section_maps, ReducedPoint};
use crate::scalar::{centered_turns, from_usize, lit, to_f64, Real};

type C<T> = Complex<T>;

/// The space a sample lives in, which fixes its distance function.
#[derive(Clone, Debug, PartialEq)]
pub enum Chart {
    /// `CP^n_λ`, Fubini-Study distance at scale `√λ`.
    Projective { n: usize, lambda: f64 },
    /// `H^n_λ`, quotient distance at scale `√λ`.
    Quotient { n: usize, lambda: f64 },
    Euclidean { dim: usize },
    /// No coordinates; only the distance matrix is meaningful.
    Abstract(String),
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chart::Projective { n, lambda } => write!(f, "CP^{n}(lambda={lambda})"),
            Chart::Quotient { n, lambda } => write!(f, "H^{n}(lambda={lambda})"),
            Chart::Euclidean { dim } => write!(f, "R^{dim}"),
            Chart::Abstract(name) => write!(f, "abstract:{name}"),
        }
    }
}

/// Distance function attached to a [`Chart`].
#[derive(Clone, Debug)]
pub enum ChartMetric<T: Real> {
    Projective { scale: T },
    Quotient { scale: T, group: HnQuotient<T> },
    Euclidean,
}

impl<T: Real> ChartMetric<T> {
    pub fn for_chart(chart: &Chart) -> Result<Self> {
        match chart {
            Chart::Projective { lambda, .. } => Ok(Self::Projective { scale: lit::<T>(*lambda).sqrt() }),
            Chart::Quotient { n, lambda } => {
                Ok(Self::Quotient { scale: lit::<T>(*lambda).sqrt(), group: HnQuotient::new(*n)? })
            }
            Chart::Euclidean { .. } => Ok(Self::Euclidean),
            Chart::Abstract(name) => Err(Error::Unsupported(format!("chart {name} has no coordinate distance"))),
        }
    }

    pub fn distance(&self, a: &[C<T>], b: &[C<T>]) -> T {
        match self {
            Self::Projective { scale } => fubini_study_distance(a, b, *scale),
            Self::Quotient { scale, group } => hn_quotient_distance(a, b, group, *scale),
            Self::Euclidean => a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + (x - y).norm_sqr()).sqrt(),
        }
    }
}

fn hn_quotient_distance<T: Real>(a: &[C<T>], b: &[C<T>], group: &HnQuotient<T>, scale: T) -> T {
    use crate::maps::HnPoint;
    let p = HnPoint { z: a.to_vec(), lambda: T::one() };
    let q = HnPoint { z: b.to_vec(), lambda: T::one() };
    hn_distance(&p, &q, group, scale)
}

/// A finite metric space: point coordinates in a named chart and the
/// symmetric distance matrix.
#[derive(Clone, Debug)]
pub struct FiniteMetricSample<T: Real> {
    pub chart: Chart,
    /// Coordinates per point; empty for [`Chart::Abstract`]. Real charts keep
    /// zero imaginary parts.
    pub points: Vec<Vec<C<T>>>,
    pub dist: DMatrix<T>,
}

impl<T: Real> FiniteMetricSample<T> {
    /// Builds the distance matrix from the chart's distance function.
    pub fn from_points(chart: Chart, points: Vec<Vec<C<T>>>) -> Result<Self> {
        let metric = ChartMetric::for_chart(&chart)?;
        let m = points.len();
        let rows: Vec<Vec<T>> = (0..m)
            .into_par_iter()
            .map(|i| (0..m).map(|j| if j > i { metric.distance(&points[i], &points[j]) } else { T::zero() }).collect())
            .collect();
        let mut dist = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i + 1..m {
                dist[(i, j)] = rows[i][j];
                dist[(j, i)] = rows[i][j];
            }
        }
        Ok(Self { chart, points, dist })
    }

    /// Wraps a precomputed matrix after checking symmetry, zero diagonal and
    /// nonnegativity.
    pub fn from_matrix(chart: Chart, dist: DMatrix<T>) -> Result<Self> {
        if dist.nrows() != dist.ncols() {
            return Err(Error::InvalidParameter(format!("distance matrix is {}x{}", dist.nrows(), dist.ncols())));
        }
        for i in 0..dist.nrows() {
            if dist[(i, i)] != T::zero() {
                return Err(Error::InvalidParameter(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                if dist[(i, j)] != dist[(j, i)] || dist[(i, j)] < T::zero() {
                    return Err(Error::InvalidParameter(format!("entry ({i}, {j}) is not a distance")));
                }
            }
        }
        Ok(Self { chart, points: Vec::new(), dist })
    }

    pub fn len(&self) -> usize {
        self.dist.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn diameter(&self) -> Result<T> {
        if self.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(self.dist.iter().fold(T::zero(), |m, &x| m.max(x)))
    }

    /// Largest `d(x, z) - d(x, y) - d(y, z)` over all triples, or over
    /// `max_triples` random triples when the sample is larger.
    pub fn triangle_violation(&self, max_triples: usize, seed: u64) -> T {
        let m = self.len();
        let mut worst = T::zero();
        let mut check = |i: usize, j: usize, k: usize| {
            worst = worst.max(self.dist[(i, k)] - self.dist[(i, j)] - self.dist[(j, k)]);
        };
        if m.pow(3) <= max_triples {
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        check(i, j, k);
                    }
                }
            }
        } else if m > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..max_triples {
                check(rng.random_range(0..m), rng.random_range(0..m), rng.random_range(0..m));
            }
        }
        worst
    }

    /// The same sample with every distance multiplied by `t`.
    pub fn scaled(&self, t: T) -> Self {
        let chart = match &self.chart {
            Chart::Projective { n, lambda } => Chart::Projective { n: *n, lambda: lambda * to_f64(t * t) },
            Chart::Quotient { n, lambda } => Chart::Quotient { n: *n, lambda: lambda * to_f64(t * t) },
            c => c.clone(),
        };
        Self {
            chart,
            points: self.points.iter().map(|p| p.iter().map(|c| c * t).collect()).collect(),
            dist: &self.dist * t,
        }
    }
}

fn require_same_chart<T: Real>(a: &FiniteMetricSample<T>, b: &FiniteMetricSample<T>) -> Result<()> {
    if a.chart != b.chart {
        return Err(Error::ChartMismatch(a.chart.to_string(), b.chart.to_string()));
    }
    Ok(())
}

/// Distances between the points of `a` (rows) and `b` (columns).
pub fn cross_distances<T: Real>(a: &FiniteMetricSample<T>, b: &FiniteMetricSample<T>) -> Result<DMatrix<T>> {
    require_same_chart(a, b)?;
    let metric = ChartMetric::for_chart(&a.chart)?;
    let rows: Vec<Vec<T>> =
        a.points.par_iter().map(|p| b.points.iter().map(|q| metric.distance(p, q)).collect()).collect();
    Ok(DMatrix::from_fn(a.len(), b.len(), |i, j| rows[i][j]))
}

/// `max(sup_a inf_b d, sup_b inf_a d)` from a cross-distance matrix.
pub fn hausdorff_from_cross<T: Real>(cross: &DMatrix<T>) -> T {
    let big = T::max_value().unwrap_or(lit(f64::MAX));
    let row = cross.row_iter().map(|r| r.iter().fold(big, |m, &x| m.min(x))).fold(T::zero(), |m, x| m.max(x));
    let col = cross.column_iter().map(|c| c.iter().fold(big, |m, &x| m.min(x))).fold(T::zero(), |m, x| m.max(x));
    row.max(col)
}

pub fn hausdorff_distance<T: Real>(a: &FiniteMetricSample<T>, b: &FiniteMetricSample<T>) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(hausdorff_from_cross(&cross_distances(a, b)?))
}

/// Interval `[lower, upper]` containing the Gromov-Hausdorff distance.
#[derive(Clone, Debug, PartialEq)]
pub struct GhBounds<T> {
    pub lower: T,
    pub upper: T,
    /// Correspondence that realized `upper`.
    pub correspondence: &'static str,
}

/// `max |d_A(i, i') - d_B(j, j')|` over pairs of related points.
pub fn distortion<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>, pairs: &[(usize, usize)]) -> T {
    pairs
        .par_iter()
        .map(|&(i, j)| pairs.iter().fold(T::zero(), |m, &(i2, j2)| m.max((a[(i, i2)] - b[(j, j2)]).abs())))
        .reduce(T::zero, |x, y| x.max(y))
}

fn argmin<'a, T: Real>(xs: impl Iterator<Item = &'a T>) -> usize {
    xs.enumerate().fold((0, None::<T>), |(bi, bv), (i, &x)| match bv {
        Some(v) if v <= x => (bi, Some(v)),
        _ => (i, Some(x)),
    })
    .0
}

fn nearest_neighbour_correspondence<T: Real>(cross: &DMatrix<T>) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(cross.nrows() + cross.ncols());
    for i in 0..cross.nrows() {
        pairs.push((i, argmin(cross.row(i).iter())));
    }
    for j in 0..cross.ncols() {
        let i = argmin(cross.column(j).iter());
        if !pairs.contains(&(i, j)) {
            pairs.push((i, j));
        }
    }
    pairs
}

fn eccentricity_order<T: Real>(d: &DMatrix<T>) -> Vec<usize> {
    let ecc: Vec<T> = d.row_iter().map(|r| r.iter().fold(T::zero(), |m, &x| m.max(x))).collect();
    let mut idx: Vec<usize> = (0..d.nrows()).collect();
    idx.sort_by(|&i, &j| ecc[i].partial_cmp(&ecc[j]).unwrap_or(std::cmp::Ordering::Equal));
    idx
}

fn quantile_correspondence<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> Vec<(usize, usize)> {
    let (oa, ob) = (eccentricity_order(a), eccentricity_order(b));
    let (m, k) = (oa.len(), ob.len());
    let mut pairs: Vec<(usize, usize)> = (0..m).map(|i| (oa[i], ob[i * k / m])).collect();
    for j in 0..k {
        let p = (oa[j * m / k], ob[j]);
        if !pairs.contains(&p) {
            pairs.push(p);
        }
    }
    pairs
}

/// Certified GH bounds. The lower bound is `½|diam A - diam B|`; the upper
/// bound is half the smallest distortion among the candidate correspondences
/// (mutual nearest neighbours when both samples share a chart, the identity
/// when sizes agree, and an eccentricity-quantile matching).
pub fn gh_bounds<T: Real>(a: &FiniteMetricSample<T>, b: &FiniteMetricSample<T>) -> Result<GhBounds<T>> {
    let (da, db) = (a.diameter()?, b.diameter()?);
    let half = lit::<T>(0.5);
    let mut candidates: Vec<(&'static str, Vec<(usize, usize)>)> = Vec::new();
    if a.len() == b.len() {
        candidates.push(("identity", (0..a.len()).map(|i| (i, i)).collect()));
    }
    if a.chart == b.chart && !matches!(a.chart, Chart::Abstract(_)) && !a.points.is_empty() && !b.points.is_empty() {
        candidates.push(("nearest-neighbour", nearest_neighbour_correspondence(&cross_distances(a, b)?)));
    }
    candidates.push(("eccentricity-quantile", quantile_correspondence(&a.dist, &b.dist)));
    let (name, dis) = candidates
        .iter()
        .map(|(name, pairs)| (*name, distortion(&a.dist, &b.dist, pairs)))
        .fold(None, |best: Option<(&'static str, T)>, c| match best {
            Some(b) if b.1 <= c.1 => Some(b),
            _ => Some(c),
        })
        .expect("at least one candidate");
    Ok(GhBounds { lower: half * (da - db).abs(), upper: half * dis, correspondence: name })
}

/// Bounds on `2 d_GH(A, B) / (diam A + diam B)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NghBounds<T> {
    pub lower: T,
    pub upper: T,
    /// Both diameters vanish although the samples are not single points.
    pub degenerate: bool,
}

pub fn ngh_distance<T: Real>(a: &FiniteMetricSample<T>, b: &FiniteMetricSample<T>) -> Result<NghBounds<T>> {
    if a.len() == 1 && b.len() == 1 {
        return Ok(NghBounds { lower: T::zero(), upper: T::zero(), degenerate: false });
    }
    let total = a.diameter()? + b.diameter()?;
    if total == T::zero() {
        return Ok(NghBounds { lower: T::zero(), upper: T::zero(), degenerate: true });
    }
    let gh = gh_bounds(a, b)?;
    let two = lit::<T>(2.0);
    Ok(NghBounds { lower: two * gh.lower / total, upper: two * gh.upper / total, degenerate: false })
}

/// A flat torus `R^k / Λ` with `Λ` spanned by the columns of
/// `lattice_basis` inside a diagonal-metric `R^d`. When `collapsed` is set,
/// the metric is the quotient metric transverse to that direction.
#[derive(Clone, Debug)]
pub struct FlatTorusSpec<T: Real> {
    pub lattice_basis: DMatrix<T>,
    pub metric_diag: DVector<T>,
    pub collapsed: Option<DVector<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiameterMode {
    Exact,
    UpperBound,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusDiameter<T> {
    pub value: T,
    pub mode: DiameterMode,
}

impl<T: Real> FlatTorusSpec<T> {
    pub fn rank(&self) -> usize {
        self.lattice_basis.ncols()
    }

    /// Gram matrix of the lattice basis in the (possibly quotient) metric.
    pub fn gram(&self) -> DMatrix<f64> {
        let l = self.lattice_basis.map(to_f64);
        let w = self.metric_diag.map(to_f64);
        let mut p = DMatrix::from_diagonal(&w);
        if let Some(c) = &self.collapsed {
            let wc = w.component_mul(&c.map(to_f64));
            let norm = wc.dot(&c.map(to_f64));
            p -= &wc * wc.transpose() / norm;
        }
        l.transpose() * p * l
    }

    /// Euclidean realization: columns `b_i` with `b_i · b_j = G_ij`, from a
    /// QR factorization of the weighted, horizontally projected basis.
    fn euclidean_basis(&self) -> Result<DMatrix<f64>> {
        let mut l = self.lattice_basis.map(to_f64);
        let w = self.metric_diag.map(to_f64);
        if let Some(c) = &self.collapsed {
            let c = c.map(to_f64);
            let wc = w.component_mul(&c);
            let norm = wc.dot(&c);
            for mut col in l.column_iter_mut() {
                let t = wc.dot(&col) / norm;
                col -= &c * t;
            }
        }
        let mut e = l;
        for (i, mut row) in e.row_iter_mut().enumerate() {
            row *= w[i].sqrt();
        }
        let k = e.ncols();
        let r = e.qr().r();
        let r = r.rows(0, k).into_owned();
        let top = (0..k).fold(0.0f64, |m, i| m.max(r[(i, i)].abs()));
        if k > 0 && (0..k).any(|i| !(r[(i, i)].abs() > 1e-15 * top)) {
            return Err(Error::InvalidParameter("lattice basis is not full rank in the fiber metric".into()));
        }
        Ok(r)
    }
}

/// Gram-Schmidt coefficients of the columns of `b`.
fn gso(b: &DMatrix<f64>) -> (Vec<DVector<f64>>, DMatrix<f64>) {
    let k = b.ncols();
    let mut star: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut mu = DMatrix::zeros(k, k);
    for i in 0..k {
        let mut v = b.column(i).into_owned();
        for j in 0..i {
            mu[(i, j)] = b.column(i).dot(&star[j]) / star[j].norm_squared();
            v -= &star[j] * mu[(i, j)];
        }
        star.push(v);
    }
    (star, mu)
}

/// LLL reduction (`δ = 3/4`) of the columns of `b`.
pub fn lll_reduce(b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut b = b.clone();
    let k = b.ncols();
    let mut i = 1;
    let mut guard = 0;
    while i < k && guard < 10_000 {
        guard += 1;
        for j in (0..i).rev() {
            let (_, mu) = gso(&b);
            let q = mu[(i, j)].round();
            if q != 0.0 {
                let bj = b.column(j).into_owned();
                let mut col = b.column_mut(i);
                col -= bj * q;
            }
        }
        let (star, mu) = gso(&b);
        if star[i].norm_squared() >= (0.75 - mu[(i, i - 1)].powi(2)) * star[i - 1].norm_squared() {
            i += 1;
        } else {
            b.swap_columns(i, i - 1);
            i = i.max(2) - 1;
        }
    }
    b
}

/// Squared distance from `y` to the lattice `B Z^k`, by sphere decoding
/// started from the Babai point.
pub fn lattice_distance_sq(b: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    let qr = b.clone().qr();
    let r = qr.r();
    let target = qr.q().transpose() * y;
    let k = b.ncols();
    let mut u = vec![0.0; k];
    let mut acc = 0.0;
    for l in (0..k).rev() {
        let c = (target[l] - (l + 1..k).map(|j| r[(l, j)] * u[j]).sum::<f64>()) / r[(l, l)];
        u[l] = c.round();
        acc += ((u[l] - c) * r[(l, l)]).powi(2);
    }
    let mut best = acc * (1.0 + 1e-12) + 1e-300;
    let mut u = vec![0.0; k];
    sphere_search(&r, &target, k as isize - 1, &mut u, 0.0, &mut best);
    best
}

fn sphere_search(r: &DMatrix<f64>, y: &DVector<f64>, level: isize, u: &mut [f64], acc: f64, best: &mut f64) {
    if level < 0 {
        *best = best.min(acc);
        return;
    }
    let l = level as usize;
    let k = u.len();
    let c = (y[l] - (l + 1..k).map(|j| r[(l, j)] * u[j]).sum::<f64>()) / r[(l, l)];
    let rll = r[(l, l)].abs();
    // levels with negligible R_ll contribute almost nothing; cap their range
    let rad = ((*best - acc).max(0.0).sqrt() / rll).min(64.0);
    let mut ui = (c - rad).ceil();
    while ui <= (c + rad).floor() {
        let a = acc + ((ui - c) * rll).powi(2);
        if a <= *best {
            u[l] = ui;
            sphere_search(r, y, level - 1, u, a, best);
        }
        ui += 1.0;
    }
}

/// Voronoi-relevant vectors: `±v` is relevant iff it is the unique pair of
/// shortest vectors in its class modulo `2Λ`.
fn relevant_vectors(b: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let k = b.ncols();
    let range: i64 = 3;
    let mut out = Vec::new();
    for class in 1..(1u32 << k) {
        let mut best: Vec<DVector<f64>> = Vec::new();
        let mut best_norm = f64::INFINITY;
        let side = (2 * range + 1) as u64;
        for code in 0..side.pow(k as u32) {
            let mut rem = code;
            let x = DVector::from_fn(k, |i, _| {
                let y = (rem % side) as i64 - range;
                rem /= side;
                (((class >> i) & 1) as i64 + 2 * y) as f64
            });
            let v = b * x;
            let nv = v.norm_squared();
            if nv < best_norm * (1.0 - 1e-9) {
                best_norm = nv;
                best = vec![v];
            } else if nv <= best_norm * (1.0 + 1e-9) {
                best.push(v);
            }
        }
        if best.len() == 2 {
            out.extend(best);
        }
    }
    out
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            go(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    go(0, m, k, &mut cur, &mut out);
    out
}

/// Covering radius from the vertices of the Voronoi cell.
fn covering_radius_exact(b: &DMatrix<f64>) -> f64 {
    let k = b.ncols();
    let rel = relevant_vectors(b);
    let scale = rel.iter().fold(0.0f64, |m, v| m.max(v.norm_squared()));
    let mut best = 0.0f64;
    for combo in combinations(rel.len(), k) {
        let a = DMatrix::from_fn(k, k, |i, j| rel[combo[i]][j]);
        let h = DVector::from_fn(k, |i, _| 0.5 * rel[combo[i]].norm_squared());
        let Some(x) = a.clone().lu().solve(&h) else { continue };
        if !x.iter().all(|v| v.is_finite()) || (&a * &x - &h).amax() > 1e-9 * scale {
            continue;
        }
        if rel.iter().all(|v| v.dot(&x) <= 0.5 * v.norm_squared() + 1e-9 * scale) {
            best = best.max(x.norm());
        }
    }
    best
}

/// Diameter of the flat torus, i.e. the covering radius of its lattice.
pub fn flat_torus_diameter<T: Real>(spec: &FlatTorusSpec<T>, mode: DiameterMode) -> Result<TorusDiameter<T>> {
    let b = lll_reduce(&spec.euclidean_basis()?);
    let value = match mode {
        DiameterMode::Exact => {
            if spec.rank() > 3 {
                return Err(Error::Unsupported(format!("exact covering radius for rank {} > 3", spec.rank())));
            }
            covering_radius_exact(&b)
        }
        DiameterMode::UpperBound => 0.5 * b.column_iter().map(|c| c.norm_squared()).sum::<f64>().sqrt(),
        DiameterMode::MonteCarlo { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = b.ncols();
            (0..samples)
                .map(|_| {
                    let u = DVector::from_fn(k, |_, _| rng.random::<f64>());
                    lattice_distance_sq(&b, &(&b * u)).sqrt()
                })
                .fold(0.0, f64::max)
        }
    };
    Ok(TorusDiameter { value: lit(value), mode })
}

fn int_to_real<T: Real>(m: &IntMatrix<i64>, div: T) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| lit::<T>(m[(i, j)] as f64) / div)
}

/// The `π1`-fiber through `p`: the `η̄`-torus with lattice `(1/(n+1)) Z^n`
/// in section coordinates and weights `1/(4π² r_i²)`.
pub fn pi1_fiber_torus<T: Real>(p: &ReducedPoint<T>) -> FlatTorusSpec<T> {
    let n = p.n();
    let (_, eta_map) = section_maps(n).expect("n >= 1");
    FlatTorusSpec {
        lattice_basis: int_to_real(&eta_map, from_usize(n + 1)),
        metric_diag: p.base_r.map(|r| T::one() / (T::two_pi() * T::two_pi() * r * r)),
        collapsed: Some(DVector::repeat(n + 1, T::one())),
    }
}

/// The `π2`-fiber: the `θ̄`-torus with weights `4π² r_i²`.
pub fn pi2_fiber_torus<T: Real>(p: &ReducedPoint<T>) -> FlatTorusSpec<T> {
    let n = p.n();
    let (theta_map, _) = section_maps(n).expect("n >= 1");
    FlatTorusSpec {
        lattice_basis: int_to_real(&theta_map, from_usize(n + 1)),
        metric_diag: p.base_r.map(|r| T::two_pi() * T::two_pi() * r * r),
        collapsed: Some(DVector::repeat(n + 1, T::one())),
    }
}

/// `π n^{-(n-1)/2} e^{2π²ρ2²} / ρ1`.
pub fn paper_fiber_bound<T: Real>(n: usize, rho1: T, rho2: T) -> T {
    let nn = from_usize::<T>(n);
    T::pi() * nn.powf(-(nn - T::one()) / lit(2.0)) * (T::two_pi() * T::pi() * rho2 * rho2).exp() / rho1
}

fn gaussian_sphere<T: Real>(rng: &mut ChaCha8Rng, dim: usize, radius: T) -> Vec<C<T>> {
    let mut z: Vec<C<T>> = (0..dim)
        .map(|_| C::new(lit(rng.sample::<f64, _>(StandardNormal)), lit(rng.sample::<f64, _>(StandardNormal))))
        .collect();
    let norm = z.iter().fold(T::zero(), |s, c| s + c.norm_sqr()).sqrt();
    for c in &mut z {
        *c *= radius / norm;
    }
    z
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleTarget {
    Projective { lambda: f64 },
    Quotient { lambda: f64 },
}

impl SampleTarget {
    pub fn chart(self, n: usize) -> Chart {
        match self {
            SampleTarget::Projective { lambda } => Chart::Projective { n, lambda },
            SampleTarget::Quotient { lambda } => Chart::Quotient { n, lambda },
        }
    }

    pub fn lambda(self) -> f64 {
        match self {
            SampleTarget::Projective { lambda } | SampleTarget::Quotient { lambda } => lambda,
        }
    }
}

/// Points of `{∏ z_i = 0} ∩ {Σ|z_i|² = λ}`: point `i` lies on component
/// `z_{i mod (n+1)} = 0`, uniform on that component's sphere.
pub fn anticanonical_points<T: Real>(n: usize, lambda: T, count: usize, seed: u64) -> Vec<Vec<C<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let j = i % (n + 1);
            let mut z = gaussian_sphere(&mut rng, n, lambda.sqrt());
            z.insert(j, C::new(T::zero(), T::zero()));
            z
        })
        .collect()
}

pub fn anticanonical_sample<T: Real>(
    n: usize,
    target: SampleTarget,
    count: usize,
    seed: u64,
) -> Result<FiniteMetricSample<T>> {
    if count == 0 {
        return Err(Error::EmptySample);
    }
    FiniteMetricSample::from_points(target.chart(n), anticanonical_points(n, lit(target.lambda()), count, seed))
}

/// `|∏ z_i - e^{-4π²ρ2²} Σ z_i^{n+1}| / ‖z‖^{n+1}`.
pub fn cy_residual<T: Real>(z: &[C<T>], rho2: T) -> T {
    let norm = z.iter().fold(T::zero(), |s, c| s + c.norm_sqr()).sqrt();
    let u: Vec<C<T>> = z.iter().map(|c| c / norm).collect();
    let k = z.len() as i32;
    let eps = (-T::two_pi() * T::two_pi() * rho2 * rho2).exp();
    let prod = u.iter().fold(C::new(T::one(), T::zero()), |a, c| a * c);
    let sum = u.iter().fold(C::new(T::zero(), T::zero()), |a, c| a + c.powi(k));
    (prod - sum * eps).norm_sqr().sqrt()
}

fn horner<T: Real>(a: &[C<T>], z: C<T>) -> (C<T>, C<T>) {
    let mut p = C::new(T::zero(), T::zero());
    let mut dp = p;
    for &c in a {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Roots of the polynomial with coefficients `a` (highest degree first), by
/// Aberth iteration with a Newton polish.
pub fn polynomial_roots<T: Real>(a: &[C<T>]) -> Result<Vec<C<T>>> {
    let d = a.len() - 1;
    let lead = a[0];
    let monic: Vec<C<T>> = a.iter().map(|c| c / lead).collect();
    let radius = (1..=d).fold(T::zero(), |m, i| m.max(monic[i].norm_sqr().sqrt().powf(T::one() / from_usize(i))));
    let radius = radius.max(lit(1e-300));
    let mut z: Vec<C<T>> = (0..d)
        .map(|k| {
            let ang = T::two_pi() * from_usize::<T>(k) / from_usize::<T>(d) + lit(0.4);
            C::new(ang.cos(), ang.sin()) * radius
        })
        .collect();
    let tol = lit::<T>(1e-15);
    for _ in 0..1000 {
        let mut moved = T::zero();
        for k in 0..d {
            let (p, dp) = horner(&monic, z[k]);
            if p == C::new(T::zero(), T::zero()) {
                continue;
            }
            let ratio = p / dp;
            let s = (0..d).filter(|&j| j != k).fold(C::new(T::zero(), T::zero()), |s, j| s + (z[k] - z[j]).inv());
            let w = ratio / (C::new(T::one(), T::zero()) - ratio * s);
            z[k] -= w;
            moved = moved.max(w.norm_sqr().sqrt() / z[k].norm_sqr().sqrt().max(lit(1e-300)));
        }
        if moved < tol {
            for zk in &mut z {
                for _ in 0..2 {
                    let (p, dp) = horner(&monic, *zk);
                    if dp.norm_sqr() > T::zero() {
                        *zk -= p / dp;
                    }
                }
            }
            return Ok(z);
        }
    }
    Err(Error::ConvergenceFailure { attempts: 1000 })
}

/// Points of `∏ z_i = e^{-4π²ρ2²} Σ z_i^{n+1}` on `Σ|z_i|² = ρ1²`. Each draw
/// fixes all but one coordinate at random and solves the resulting
/// polynomial `ε z^{n+1} - P z + ε S = 0` for the remaining one.
pub fn cy_hypersurface_points<T: Real>(n: usize, rho1: T, rho2: T, count: usize, seed: u64) -> Result<Vec<Vec<C<T>>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = (-T::two_pi() * T::two_pi() * rho2 * rho2).exp();
    let tol = lit::<T>(1e-9);
    let k = n + 1;
    let mut out = Vec::with_capacity(count);
    let budget = 20 * count + 100;
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > budget {
            return Err(Error::ConvergenceFailure { attempts });
        }
        let j = rng.random_range(0..k);
        let rest = gaussian_sphere::<T>(&mut rng, n, T::one());
        let prod = rest.iter().fold(C::new(T::one(), T::zero()), |a, c| a * c);
        let sum = rest.iter().fold(C::new(T::zero(), T::zero()), |a, c| a + c.powi(k as i32));
        let mut coeffs = vec![C::new(T::zero(), T::zero()); k + 1];
        coeffs[0] = C::new(eps, T::zero());
        coeffs[n] = -prod;
        coeffs[k] = sum * eps;
        let Ok(roots) = polynomial_roots(&coeffs) else { continue };
        let root = roots[rng.random_range(0..roots.len())];
        let mut z = rest;
        z.insert(j, root);
        let norm = z.iter().fold(T::zero(), |s, c| s + c.norm_sqr()).sqrt();
        let z: Vec<C<T>> = z.iter().map(|c| c * (rho1 / norm)).collect();
        if cy_residual(&z, rho2) < tol {
            out.push(z);
        }
    }
    Ok(out)
}

pub fn cy_hypersurface_sample<T: Real>(
    n: usize,
    rho1: T,
    rho2: T,
    count: usize,
    seed: u64,
) -> Result<FiniteMetricSample<T>> {
    if count == 0 {
        return Err(Error::EmptySample);
    }
    let points = cy_hypersurface_points(n, rho1, rho2, count, seed)?;
    FiniteMetricSample::from_points(Chart::Projective { n, lambda: to_f64(rho1 * rho1) }, points)
}

/// Length of the coordinate segment `p -> q` in the ambient metric frozen at
/// the midpoint radii, with angle differences taken in `[-1/2, 1/2)`.
pub fn segment_length<T: Real>(p: &AmbientPoint<T>, q: &AmbientPoint<T>) -> T {
    let mid: Vec<T> = p.r.iter().zip(q.r.iter()).map(|(&a, &b)| (a + b) / lit(2.0)).collect();
    let g = metric_matrix(&mid);
    let d = DVector::from_iterator(
        p.dim(),
        (&q.theta - &p.theta)
            .iter()
            .map(|&x| centered_turns(x))
            .chain((&q.r - &p.r).iter().copied())
            .chain((&q.eta - &p.eta).iter().map(|&x| centered_turns(x))),
    );
    (d.transpose() * g * &d)[(0, 0)].sqrt()
}

/// Geodesic distances approximated by shortest paths in the symmetrized
/// `k`-nearest-neighbour graph.
pub fn knn_geodesic_distances<T: Real>(points: &[AmbientPoint<T>], k: usize) -> Result<DMatrix<T>> {
    let m = points.len();
    if m == 0 {
        return Err(Error::EmptySample);
    }
    let lengths: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| (0..m).map(|j| to_f64(segment_length(&points[i], &points[j]))).collect())
        .collect();
    let mut graph = UnGraph::<(), f64>::with_capacity(m, m * k);
    let nodes: Vec<NodeIndex> = (0..m).map(|_| graph.add_node(())).collect();
    for i in 0..m {
        let mut order: Vec<usize> = (0..m).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| lengths[i][a].total_cmp(&lengths[i][b]));
        for &j in order.iter().take(k) {
            if graph.find_edge(nodes[i], nodes[j]).is_none() {
                graph.add_edge(nodes[i], nodes[j], lengths[i][j]);
            }
        }
    }
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let d = dijkstra(&graph, nodes[i], None, |e| *e.weight());
            (0..m).map(|j| d.get(&nodes[j]).copied().unwrap_or(f64::INFINITY)).collect()
        })
        .collect();
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("the {k}-nearest-neighbour graph is disconnected")));
    }
    Ok(DMatrix::from_fn(m, m, |i, j| lit(0.5 * (rows[i][j] + rows[j][i]))))
}

pub fn knn_geodesic_sample<T: Real>(points: &[AmbientPoint<T>], k: usize) -> Result<FiniteMetricSample<T>> {
    let dist = knn_geodesic_distances(points, k)?;
    FiniteMetricSample::from_matrix(Chart::Abstract(format!("knn{k}-geodesic")), dist)
}

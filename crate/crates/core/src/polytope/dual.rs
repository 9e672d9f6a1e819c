//! Facet enumeration and polar duals in exact rational arithmetic.

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use super::Polytope;
use crate::scalar::Int;

pub type Rational<I> = Ratio<I>;

/// A facet `{x : <normal, x> = -1}` of a polytope containing the origin in its
/// interior. The normal is the corresponding vertex of the polar dual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet<I: Int> {
    pub normal: Vec<Rational<I>>,
    /// Indices of the vertices lying on the facet.
    pub incident: Vec<usize>,
}

#[derive(Clone, Debug)]
pub enum DualOutcome<I: Int> {
    Dual(Vec<Facet<I>>),
    /// Some supporting hyperplane passes through (or separates) the origin.
    OriginNotInterior { offending_incident: Vec<usize> },
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Row-reduces `rows` in place and returns the pivot columns.
pub(crate) fn rref<I: Int>(rows: &mut [Vec<Rational<I>>]) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = Rational::one() / rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                #[allow(clippy::needless_range_loop)]
                for j in 0..ncols {
                    let v = rows[r][j].clone() * f.clone();
                    rows[i][j] = rows[i][j].clone() - v;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

pub(crate) fn rank_of<I: Int>(vectors: &[Vec<Rational<I>>]) -> usize {
    let mut rows = vectors.to_vec();
    rref(&mut rows).len()
}

/// One-dimensional null space of `rows`, if the null space has dimension one.
fn null_line<I: Int>(rows: &[Vec<Rational<I>>]) -> Option<Vec<Rational<I>>> {
    let ncols = rows.first()?.len();
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    if pivots.len() + 1 != ncols {
        return None;
    }
    let free = (0..ncols).find(|c| !pivots.contains(c))?;
    let mut x = vec![Rational::zero(); ncols];
    x[free] = Rational::one();
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = -m[row][free].clone();
    }
    Some(x)
}

fn dot<I: Int>(a: &[Rational<I>], b: &[I]) -> Rational<I> {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x.clone() * Rational::from_integer(y.clone()))
}

/// Enumerates the facets of `p` by testing every affinely independent
/// `dim`-subset of vertices, in exact arithmetic.
pub fn facets<I: Int>(p: &Polytope<I>) -> DualOutcome<I> {
    let n = p.dim();
    let verts = p.vertices();
    let mut out: Vec<Facet<I>> = Vec::new();
    for subset in combinations(verts.len(), n) {
        // hyperplane <a, x> = b through the subset: rows [x^T, -1]
        let rows: Vec<Vec<Rational<I>>> = subset
            .iter()
            .map(|&i| {
                verts[i]
                    .iter()
                    .map(|x| Rational::from_integer(x.clone()))
                    .chain(std::iter::once(-Rational::<I>::one()))
                    .collect()
            })
            .collect();
        let Some(sol) = null_line(&rows) else { continue };
        let (a, b) = sol.split_at(n);
        let b = b[0].clone();
        if a.iter().all(Zero::is_zero) {
            continue;
        }
        let vals: Vec<Rational<I>> = verts.iter().map(|v| dot(a, v) - b.clone()).collect();
        let all_ge = vals.iter().all(|v| !v.is_negative());
        let all_le = vals.iter().all(|v| !v.is_positive());
        if !all_ge && !all_le {
            continue;
        }
        let incident: Vec<usize> = (0..verts.len()).filter(|&i| vals[i].is_zero()).collect();
        // orient so that p lies in {<a,x> >= b}
        let (a, b): (Vec<Rational<I>>, Rational<I>) =
            if all_ge { (a.to_vec(), b) } else { (a.iter().map(|x| -x.clone()).collect(), -b) };
        if !b.is_negative() {
            return DualOutcome::OriginNotInterior { offending_incident: incident };
        }
        let scale = -b;
        let normal: Vec<Rational<I>> = a.into_iter().map(|x| x / scale.clone()).collect();
        if !out.iter().any(|f| f.normal == normal) {
            out.push(Facet { normal, incident });
        }
    }
    DualOutcome::Dual(out)
}

//! Kernels of torus morphisms `T^cols -> T^rows` induced by integer matrices.

use num_rational::Ratio;
use num_traits::Zero;

use super::matrix::{smith_normal_form, IntMatrix};
use crate::scalar::Int;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupOrder<I> {
    Finite(I),
    Infinite,
}

/// A closed subgroup of a torus, described as (identity component) x (finite group).
#[derive(Clone, Debug)]
pub struct SubgroupDescription<I> {
    /// Rank of the ambient torus.
    pub ambient_rank: usize,
    /// Dimension of the identity component.
    pub connected_rank: usize,
    /// Elementary divisors > 1 of the component group.
    pub torsion_invariants: Vec<I>,
    /// Order of the whole subgroup: finite only when `connected_rank == 0`.
    pub order_of_finite_part: GroupOrder<I>,
    /// Integer directions spanning the identity component.
    pub identity_component: Vec<Vec<I>>,
    /// One generator (in turns, reduced mod 1) per torsion invariant.
    pub finite_generators: Vec<Vec<Ratio<I>>>,
    map: IntMatrix<I>,
}

/// Kernel of the torus morphism induced by `map`.
pub fn torus_kernel<I: Int>(map: &IntMatrix<I>) -> SubgroupDescription<I> {
    let snf = smith_normal_form(map);
    let rank = snf.rank();
    let cols = map.ncols();
    let v = &snf.right;

    let identity_component = (rank..cols).map(|j| v.column(j)).collect();
    let mut torsion_invariants = Vec::new();
    let mut finite_generators = Vec::new();
    for (j, d) in snf.diagonal.iter().enumerate().take(rank) {
        if d.is_one() {
            continue;
        }
        torsion_invariants.push(d.clone());
        let gen = v
            .column(j)
            .into_iter()
            .map(|x| frac_part(Ratio::new(x, d.clone())))
            .collect();
        finite_generators.push(gen);
    }
    let component_order = torsion_invariants.iter().fold(I::one(), |acc, d| acc * d.clone());
    let order_of_finite_part =
        if rank == cols { GroupOrder::Finite(component_order) } else { GroupOrder::Infinite };

    SubgroupDescription {
        ambient_rank: cols,
        connected_rank: cols - rank,
        torsion_invariants,
        order_of_finite_part,
        identity_component,
        finite_generators,
        map: map.clone(),
    }
}

fn frac_part<I: Int>(x: Ratio<I>) -> Ratio<I> {
    x.clone() - x.floor()
}

impl<I: Int> SubgroupDescription<I> {
    /// Order of the component group (product of the torsion invariants).
    pub fn component_group_order(&self) -> I {
        self.torsion_invariants.iter().fold(I::one(), |acc, d| acc * d.clone())
    }

    pub fn is_finite(&self) -> bool {
        self.connected_rank == 0
    }

    /// True if `x` (in turns) lies in the subgroup.
    pub fn contains(&self, x: &[Ratio<I>]) -> bool {
        assert_eq!(x.len(), self.ambient_rank);
        (0..self.map.nrows()).all(|i| {
            let s = self
                .map
                .row(i)
                .iter()
                .zip(x)
                .fold(Ratio::zero(), |acc: Ratio<I>, (a, b)| acc + b.clone() * a.clone());
            s.is_integer()
        })
    }

    /// One representative per connected component, each reduced mod 1.
    pub fn coset_representatives(&self) -> Vec<Vec<Ratio<I>>> {
        let mut reps = vec![vec![Ratio::zero(); self.ambient_rank]];
        for (gen, d) in self.finite_generators.iter().zip(&self.torsion_invariants) {
            let order = d.to_usize().expect("torsion invariant too large to enumerate");
            let mut next = Vec::with_capacity(reps.len() * order);
            for rep in &reps {
                for k in 0..order {
                    let k = I::from_usize(k).unwrap();
                    let elem = rep
                        .iter()
                        .zip(gen)
                        .map(|(a, g)| frac_part(a.clone() + g.clone() * Ratio::from_integer(k.clone())))
                        .collect();
                    next.push(elem);
                }
            }
            reps = next;
        }
        reps
    }

    pub fn coset_representatives_f64(&self) -> Vec<Vec<f64>> {
        self.coset_representatives()
            .into_iter()
            .map(|v| {
                v.into_iter()
                    .map(|q| q.numer().to_f64().unwrap() / q.denom().to_f64().unwrap())
                    .collect()
            })
            .collect()
    }

    pub fn identity_component_f64(&self) -> Vec<Vec<f64>> {
        self.identity_component
            .iter()
            .map(|v| v.iter().map(|x| x.to_f64().unwrap()).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_map_kernel_is_everything() {
        let k = torus_kernel(&IntMatrix::<i64>::zeros(1, 1));
        assert_eq!(k.connected_rank, 1);
        assert!(k.torsion_invariants.is_empty());
        assert_eq!(k.order_of_finite_part, GroupOrder::Infinite);
    }

    #[test]
    fn coset_reps_lie_in_kernel() {
        let a = IntMatrix::<i64>::from_i64_rows(&[&[2, -1, -1], &[-1, 2, -1]]);
        let k = torus_kernel(&a);
        let reps = k.coset_representatives();
        assert_eq!(reps.len(), 3);
        for r in &reps {
            assert!(k.contains(r));
        }
        // distinct modulo the identity component (the diagonal circle)
        let shifted: Vec<Ratio<i64>> = reps.iter().map(|r| r[0] - r[2]).map(frac_part).collect();
        let mut uniq = shifted.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 3);
    }

    #[test]
    fn scalar_map_kernel() {
        let a = IntMatrix::<i64>::identity(3).scaled(&4);
        let k = torus_kernel(&a);
        assert_eq!(k.order_of_finite_part, GroupOrder::Finite(64));
        assert_eq!(k.coset_representatives().len(), 64);
    }
}

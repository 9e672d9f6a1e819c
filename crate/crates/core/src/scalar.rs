//! Scalar abstractions shared by the numeric and the exact layers.
//!
//! Floating-point code is generic over [`Real`], which is any `nalgebra`
//! real field (in practice `f32` or `f64`). Exact lattice code is generic over
//! [`Int`], a signed `num-integer` type (`i64`, `i128` or `BigInt`).

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// Real scalar used by every floating-point module.
pub trait Real: RealField + Copy + Send + Sync + 'static {}

impl<T: RealField + Copy + Send + Sync + 'static> Real for T {}

/// Signed integer used by the exact lattice and polytope code.
pub trait Int:
    Integer + Signed + Clone + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

impl<I> Int for I where
    I: Integer + Signed + Clone + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Lossy conversion back to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    nalgebra::try_convert(x).unwrap_or(f64::NAN)
}

#[inline]
pub fn from_usize<T: Real>(k: usize) -> T {
    lit(k as f64)
}

/// Error-free product: returns `(p, e)` with `a * b = p + e` exactly.
#[inline]
pub fn two_product<T: Real>(a: T, b: T) -> (T, T) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Compensated product of a sequence of factors.
pub fn compensated_product<T: Real>(factors: impl IntoIterator<Item = T>) -> T {
    let mut it = factors.into_iter();
    let Some(mut p) = it.next() else {
        return T::one();
    };
    let mut err = T::zero();
    for a in it {
        let (q, e) = two_product(p, a);
        err = err * a + e;
        p = q;
    }
    p + err
}

/// Kahan-Babuska (Neumaier) compensated sum.
pub fn compensated_sum<T: Real>(terms: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut c = T::zero();
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Wraps an angle measured in turns into `[0, 1)`.
#[inline]
pub fn wrap_turns<T: Real>(x: T) -> T {
    let w = x - x.floor();
    if w >= T::one() {
        T::zero()
    } else {
        w
    }
}

/// Signed representative of an angle difference in turns, in `[-1/2, 1/2)`.
#[inline]
pub fn centered_turns<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    wrap_turns(x + half) - half
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_product_telescopes() {
        let r = [10.0_f64, 0.1, 1.0];
        let tau = std::f64::consts::TAU;
        let v = compensated_product(r.iter().map(|x| tau * x).chain(r.iter().map(|x| 1.0 / (tau * x))));
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn neumaier_recovers_small_terms() {
        let s = compensated_sum([1e16_f64, 1.0, -1e16]);
        assert_eq!(s, 1.0);
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_turns(1.25_f64), 0.25);
        assert_eq!(wrap_turns(-0.25_f64), 0.75);
        assert!((centered_turns(0.75_f64) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn generic_over_f32() {
        let v: f32 = compensated_product([2.0_f32, 0.5, 4.0, 0.25]);
        assert_eq!(v, 1.0);
    }
}

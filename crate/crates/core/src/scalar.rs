//! Floating-point scalar abstraction shared by every numeric routine.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::ScalarOperand;
use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// A real scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + ScalarOperand
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// IEEE total order; NaNs sort after every number.
    fn total_order(&self, other: &Self) -> Ordering;

    /// Integer key whose unsigned order matches numeric order, with both
    /// zeros mapped to the same key.
    fn sort_key(self) -> u64;

    /// One draw from N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossy conversion from `f64`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable")
    }
}

impl Scalar for f32 {
    #[inline]
    fn sort_key(self) -> u64 {
        let b = (self + 0.0).to_bits();
        u64::from(if b >> 31 == 1 { !b } else { b | (1 << 31) })
    }

    #[inline]
    fn total_order(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Scalar for f64 {
    #[inline]
    fn sort_key(self) -> u64 {
        let b = (self + 0.0).to_bits();
        if b >> 63 == 1 { !b } else { b | (1 << 63) }
    }

    #[inline]
    fn total_order(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

/// Sorts ascending under [`Scalar::total_order`].
pub(crate) fn sort_scalars<T: Scalar>(v: &mut [T]) {
    v.sort_unstable_by(|a, b| a.total_order(b));
}

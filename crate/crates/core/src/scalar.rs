//! Numeric abstractions shared by the fusion, reward, curriculum and metric code.
//!
//! [`Scalar`] is anything that supports the field operations plus exact
//! conversion from small integers. Rationals qualify, which lets the rank
//! arithmetic (harmonic rank aggregates, the piecewise-linear rank map,
//! decay-weighted sums, curriculum means) be checked without rounding.
//!
//! [`Real`] adds the transcendental functions needed by the logarithmic
//! rank bonus, NDCG discounts, BM25 IDF and softmax sampling.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Float, Num};

/// Field-like scalar with exact conversion from `usize`.
pub trait Scalar: Num + Copy + PartialOrd + Debug + Send + Sync + 'static {
    fn from_usize(n: usize) -> Self;

    /// Nearest representable value. Lossy for rationals built from
    /// non-dyadic floats.
    fn from_f64(x: f64) -> Self;

    fn to_f64(self) -> f64;

    #[inline]
    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

/// Floating-point scalar.
pub trait Real: Scalar + Float {}

macro_rules! impl_float_scalar {
    ($($t:ty),*) => {
        $(
            impl Scalar for $t {
                #[inline]
                fn from_usize(n: usize) -> Self {
                    n as $t
                }
                #[inline]
                fn from_f64(x: f64) -> Self {
                    x as $t
                }
                #[inline]
                fn to_f64(self) -> f64 {
                    self as f64
                }
            }

            impl Real for $t {}
        )*
    };
}

impl_float_scalar!(f32, f64);

macro_rules! impl_ratio_scalar {
    ($($t:ty),*) => {
        $(
            impl Scalar for Ratio<$t> {
                #[inline]
                fn from_usize(n: usize) -> Self {
                    Ratio::from_integer(n as $t)
                }
                fn from_f64(x: f64) -> Self {
                    Ratio::approximate_float(x).expect("finite value representable as a ratio")
                }
                #[inline]
                fn to_f64(self) -> f64 {
                    *self.numer() as f64 / *self.denom() as f64
                }
            }
        )*
    };
}

impl_ratio_scalar!(i64, i128);

/// Exact rational built from a numerator and a denominator.
pub fn ratio<S: Scalar>(numer: usize, denom: usize) -> S {
    S::from_usize(numer) / S::from_usize(denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = Ratio<i64>;

    #[test]
    fn ratio_is_exact_for_rationals() {
        let third: Q = ratio(1, 3);
        assert_eq!(third + third + third, Q::from_usize(1));
        assert_eq!(Q::from_f64(0.6), Q::new(3, 5));
    }

    #[test]
    fn max_of_picks_larger() {
        assert_eq!(2.0f64.max_of(3.0), 3.0);
        assert_eq!(Q::new(1, 2).max_of(Q::new(1, 3)), Q::new(1, 2));
    }
}

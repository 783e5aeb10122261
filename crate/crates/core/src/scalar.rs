//! Scalar abstraction used by extended reals, certificate evaluation and the
//! condition checkers.
//!
//! The checkers are written once against [`Scalar`] and instantiated with
//! exact rationals (the default, bit-exact verdicts) or with `f64`/`f32` for a
//! fast approximate cross-check.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive};

pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static {
    /// `true` when arithmetic on this type is exact.
    const EXACT: bool;

    fn from_rational(r: &BigRational) -> Self;

    fn from_integer(i: &BigInt) -> Self;

    /// Largest integer not greater than `self`.
    fn floor(&self) -> Self;

    fn to_f64(&self) -> f64;

    /// Converts back to an integer when the value is integral.
    fn to_integer(&self) -> Option<BigInt>;

    fn pow_u32(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }

    /// Human-readable rendering used in reports.
    fn show(&self) -> String {
        self.to_string()
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn from_integer(i: &BigInt) -> Self {
        BigRational::from_integer(i.clone())
    }

    fn floor(&self) -> Self {
        BigRational::floor(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(if self.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        })
    }

    fn to_integer(&self) -> Option<BigInt> {
        self.is_integer().then(|| BigRational::to_integer(self))
    }

    fn show(&self) -> String {
        crate::lang::fmt_rational(self)
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_rational(r: &BigRational) -> Self {
                ToPrimitive::to_f64(r).unwrap_or(f64::NAN) as $t
            }

            fn from_integer(i: &BigInt) -> Self {
                ToPrimitive::to_f64(i).unwrap_or(f64::NAN) as $t
            }

            fn floor(&self) -> Self {
                <$t>::floor(*self)
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn to_integer(&self) -> Option<BigInt> {
                if self.fract() == 0.0 && self.is_finite() {
                    num_traits::FromPrimitive::from_f64(*self as f64)
                } else {
                    None
                }
            }

            fn pow_u32(&self, exp: u32) -> Self {
                self.powi(exp.min(i32::MAX as u32) as i32)
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> BigRational {
        BigRational::new(1.into(), 2.into())
    }

    #[test]
    fn floor_rounds_toward_negative_infinity() {
        let r = BigRational::new((-7).into(), 2.into());
        assert_eq!(Scalar::floor(&r), BigRational::from_integer((-4).into()));
        assert_eq!(Scalar::floor(&-3.5f64), -4.0);
    }

    #[test]
    fn conversions_agree() {
        assert_eq!(<f64 as Scalar>::from_rational(&half()), 0.5);
        assert_eq!(Scalar::to_f64(&half()), 0.5);
        assert_eq!(<f32 as Scalar>::from_integer(&BigInt::from(-3)), -3.0);
        assert_eq!(Scalar::to_integer(&4.0f64), Some(BigInt::from(4)));
        assert_eq!(Scalar::to_integer(&half()), None);
    }

    #[test]
    fn integer_powers() {
        let two = BigRational::from_integer(2.into());
        assert_eq!(two.pow_u32(31), BigRational::from_integer(BigInt::from(1u64 << 31)));
        assert_eq!(2.0f64.pow_u32(10), 1024.0);
    }
}

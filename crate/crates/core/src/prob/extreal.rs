use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use crate::scalar::Scalar;

/// A value in `[0, ∞]`.
///
/// Multiplication by a weight follows `0·∞ = 0` and `w·∞ = ∞` for `w > 0`.
/// `Finite` values are expected to be nonnegative; use [`ExtReal::finite`]
/// when the sign is not known.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtReal<S> {
    Finite(S),
    Infinite,
}

impl<S: Scalar> ExtReal<S> {
    /// `None` when `x` is negative.
    pub fn finite(x: S) -> Option<Self> {
        if x < S::zero() {
            None
        } else {
            Some(Self::Finite(x))
        }
    }

    pub fn zero() -> Self {
        Self::Finite(S::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Finite(x) if x.is_zero())
    }

    pub fn as_finite(&self) -> Option<&S> {
        match self {
            Self::Finite(x) => Some(x),
            Self::Infinite => None,
        }
    }

    /// `w · self` for a nonnegative weight.
    pub fn scale(&self, w: &S) -> Self {
        match self {
            Self::Finite(x) => Self::Finite(w.clone() * x.clone()),
            Self::Infinite if w.is_zero() => Self::zero(),
            Self::Infinite => Self::Infinite,
        }
    }

    /// Adds a finite, possibly negative, offset. The result may be negative,
    /// so it is returned as a plain scalar, or `None` for `∞`.
    pub fn offset(&self, d: &S) -> Option<S> {
        self.as_finite().map(|x| x.clone() + d.clone())
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn map<T: Scalar>(&self, f: impl FnOnce(&S) -> T) -> ExtReal<T> {
        match self {
            Self::Finite(x) => ExtReal::Finite(f(x)),
            Self::Infinite => ExtReal::Infinite,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Self::Finite(x) => x.to_f64(),
            Self::Infinite => f64::INFINITY,
        }
    }
}

impl<S: Scalar> Add for ExtReal<S> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Self::Finite(a), Self::Finite(b)) => Self::Finite(a + b),
            _ => Self::Infinite,
        }
    }
}

impl<S: Scalar> Add<&ExtReal<S>> for &ExtReal<S> {
    type Output = ExtReal<S>;

    fn add(self, rhs: &ExtReal<S>) -> ExtReal<S> {
        self.clone() + rhs.clone()
    }
}

impl<S: Scalar> PartialOrd for ExtReal<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Self::Finite(a), Self::Finite(b)) => a.partial_cmp(b),
            (Self::Finite(_), Self::Infinite) => Some(Ordering::Less),
            (Self::Infinite, Self::Finite(_)) => Some(Ordering::Greater),
            (Self::Infinite, Self::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl<S: Scalar> fmt::Display for ExtReal<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(x) => write!(f, "{x}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

/// `Σ wᵢ·xᵢ` with the `0·∞ = 0` convention.
pub fn extreal_sum_weighted<'a, S, I>(terms: I) -> ExtReal<S>
where
    S: Scalar,
    I: IntoIterator<Item = (&'a S, &'a ExtReal<S>)>,
{
    terms.into_iter().fold(ExtReal::zero(), |acc, (w, x)| acc + x.scale(w))
}
